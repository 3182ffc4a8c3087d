#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "factgauntlet/domain.hpp"
#include "factgauntlet/embedding.hpp"
#include "factgauntlet/knowledge_base.hpp"
#include "factgauntlet/llm.hpp"

namespace fgtest {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "fg") {
    static std::atomic<unsigned> counter{0};
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            (tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const noexcept { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

inline void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// One-dimensional embedder: the text must be a decimal number.
class NumberEmbedder final : public factgauntlet::Embedder {
 public:
  std::string name() const override { return "number"; }
  std::size_t dim() const override { return 1; }
  factgauntlet::EmbeddingVector embed(std::string_view text) const override {
    return factgauntlet::EmbeddingVector({std::stod(std::string(text))});
  }
};

inline factgauntlet::KbEntry entry(const std::string& id, std::vector<double> v,
                                   bool malicious = false, const std::string& text = "") {
  using namespace factgauntlet;
  return {Evidence(id, text.empty() ? "text of " + id : text,
                   malicious ? Provenance::malicious("test") : Provenance::clean()),
          EmbeddingVector(std::move(v))};
}

/// Builds a KB whose entries are embedded with `embedder`.
inline factgauntlet::KnowledgeBase make_kb(const std::string& claim_id,
                                           const std::vector<std::pair<std::string, std::string>>& docs,
                                           const factgauntlet::Embedder& embedder) {
  using namespace factgauntlet;
  std::vector<KbEntry> entries;
  for (const auto& [id, text] : docs) entries.push_back({Evidence(id, text), embedder.embed(text)});
  return KnowledgeBase(claim_id, embedder.dim(), std::move(entries));
}

using Rule = factgauntlet::ScriptedBackend::Rule;

inline Rule rule(std::vector<std::string> contains, std::string response) {
  return Rule{std::move(contains), std::nullopt, std::move(response)};
}

/// Counts calls and delegates to a scripted backend.
class CountingBackend final : public factgauntlet::LlmBackend {
 public:
  explicit CountingBackend(const factgauntlet::LlmBackend& inner) : inner_(inner) {}
  std::string name() const override { return "counting"; }
  std::string generate(const factgauntlet::CompletionRequest& r) const override {
    ++calls_;
    return inner_.generate(r);
  }
  std::size_t calls() const noexcept { return calls_.load(); }

 private:
  const factgauntlet::LlmBackend& inner_;
  mutable std::atomic<std::size_t> calls_{0};
};

/// claims.json plus kb/*.jsonl with `per_kb` evidences each.
inline void write_dataset(const fs::path& root,
                   const std::vector<std::tuple<std::string, std::string, std::string>>& claims,
                   std::size_t per_kb = 10) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [id, text, label] : claims) {
    arr.push_back({{"claim_id", id}, {"claim", text}, {"label", label}});
    std::string kb;
    for (std::size_t i = 0; i < per_kb; ++i)
      kb += nlohmann::json{{"evidence_id", id + "-e" + std::to_string(i)},
                           {"text", "background note " + std::to_string(i) + " about " + text}}
                .dump() +
            "\n";
    write_file(root / "kb" / (id + ".jsonl"), kb);
  }
  write_file(root / "claims.json", arr.dump(2));
}

}  // namespace fgtest
