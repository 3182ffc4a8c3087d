#include "factgauntlet/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <set>

#include <nlohmann/json.hpp>

#include "factgauntlet/error.hpp"
#include "factgauntlet/text.hpp"

namespace factgauntlet {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Claim parse_claim(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("expected an object");
  Claim claim;
  claim.id = j.contains("claim_id") ? j.at("claim_id").get<std::string>()
                                    : j.at("id").get<std::string>();
  claim.text =
      j.contains("claim") ? j.at("claim").get<std::string>() : j.at("text").get<std::string>();
  claim.gold_label = label_from_string(j.contains("label") ? j.at("label").get<std::string>()
                                                           : j.at("gold_label").get<std::string>());
  if (j.contains("date") && !j["date"].is_null()) claim.date = j["date"].get<std::string>();
  if (j.contains("speaker") && !j["speaker"].is_null())
    claim.speaker = j["speaker"].get<std::string>();
  claim.validate();
  if (claim.id.find('/') != std::string::npos || claim.id.find('\\') != std::string::npos ||
      claim.id == "." || claim.id == "..")
    throw ValidationError("claim_id '" + claim.id + "' is not usable as a file name");
  return claim;
}

}  // namespace

std::size_t Dataset::targetable_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(claims.begin(), claims.end(), [](const Claim& c) { return c.targetable(); }));
}

std::size_t Dataset::evidence_count() const noexcept {
  std::size_t n = 0;
  for (const auto& kb : kbs) n += kb.size();
  return n;
}

std::size_t Dataset::index_of(const std::string& claim_id) const {
  for (std::size_t i = 0; i < claims.size(); ++i)
    if (claims[i].id == claim_id) return i;
  throw ValidationError("unknown claim id '" + claim_id + "'");
}

Dataset load_dataset(const fs::path& root, const Embedder& embedder) {
  const auto claims_path = root / "claims.json";
  if (!fs::exists(claims_path))
    throw ValidationError("dataset has no claims.json: " + claims_path.string());

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(claims_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(claims_path.string() + ": " + e.what());
  }
  if (!doc.is_array()) throw ValidationError(claims_path.string() + ": expected a JSON array");

  Dataset dataset;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto where = claims_path.string() + "[" + std::to_string(i) + "]";
    Claim claim;
    try {
      claim = parse_claim(doc[i]);
    } catch (const Error& e) {
      throw ValidationError(where + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(where + ": " + e.what());
    }
    if (!seen.insert(claim.id).second)
      throw ValidationError(where + ": duplicate claim_id '" + claim.id + "'");

    const auto kb_path = root / "kb" / (claim.id + ".jsonl");
    if (!fs::exists(kb_path))
      throw ValidationError(where + ": missing knowledge base file " + kb_path.string());
    dataset.kbs.push_back(load_knowledge_base(kb_path, claim.id, embedder));
    for (const auto& entry : dataset.kbs.back().entries())
      if (entry.evidence.is_malicious())
        throw ValidationError(kb_path.string() + ": dataset evidence '" + entry.evidence.id() +
                              "' is marked malicious");
    dataset.claims.push_back(std::move(claim));
  }
  return dataset;
}

std::string dataset_fingerprint(const fs::path& root) {
  std::uint64_t h = text::fnv1a64(read_file(root / "claims.json"));
  std::vector<fs::path> kb_files;
  if (fs::is_directory(root / "kb"))
    for (const auto& entry : fs::directory_iterator(root / "kb"))
      if (entry.is_regular_file() && entry.path().extension() == ".jsonl")
        kb_files.push_back(entry.path());
  std::sort(kb_files.begin(), kb_files.end());
  for (const auto& path : kb_files) {
    h = text::fnv1a64(path.filename().string(), h);
    h = text::fnv1a64(read_file(path), h);
  }
  return text::hex64(h);
}

}  // namespace factgauntlet
