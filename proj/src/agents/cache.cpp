#include <mutex>

#include "gridsigma/agents.hpp"
#include "gridsigma/digest.hpp"
#include "gridsigma/text.hpp"

namespace gridsigma::agents {

CompletionCache::CompletionCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(*dir_);
}

std::string CompletionCache::key(std::string_view prompt_text, std::string_view model,
                                 double temperature) {
  std::string material(prompt_text);
  material += '\x1f';
  material += model;
  material += '\x1f';
  material += text::exact(temperature);
  return sha256_hex(material);
}

std::optional<std::string> CompletionCache::get(const std::string& key) const {
  {
    std::shared_lock lock(mutex_);
    if (const auto it = memory_.find(key); it != memory_.end()) return it->second;
  }
  if (!dir_) return std::nullopt;
  const auto path = *dir_ / key.substr(0, 2) / (key + ".txt");
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  std::string body = text::read_file(path.string());
  std::unique_lock lock(mutex_);
  memory_.emplace(key, body);
  return body;
}

void CompletionCache::put(const std::string& key, const std::string& completion) {
  std::unique_lock lock(mutex_);
  memory_[key] = completion;
  if (dir_) {
    const auto sub = *dir_ / key.substr(0, 2);
    std::filesystem::create_directories(sub);
    text::write_file((sub / (key + ".txt")).string(), completion);
  }
}

std::size_t CompletionCache::size() const {
  std::shared_lock lock(mutex_);
  return memory_.size();
}

}  // namespace gridsigma::agents
