#pragma once

#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include "moose/protocol/session.hpp"

namespace moose::api {

/// Files under one data directory: corpora/<digest>.jsonl and sessions/<id>.json.
/// Every write goes to a temporary file first and is renamed into place.
class Store {
public:
  explicit Store(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }

  /// Validates and persists a corpus; the id is the SHA-256 of the bytes, so re-uploads are idempotent.
  std::string put_corpus(std::string_view jsonl);
  bool has_corpus(const std::string& id) const;
  /// Throws Error{NotFound}.
  InspirationCorpus corpus(const std::string& id) const;

  void save(const protocol::SessionState& session);
  /// Replays and verifies the stored export. Throws Error{NotFound} or Error{CorruptSession}.
  protocol::SessionState load(const SessionId& id) const;
  std::vector<SessionId> sessions() const;

private:
  std::filesystem::path corpus_path(const std::string& id) const;
  std::filesystem::path session_path(const SessionId& id) const;

  std::filesystem::path root_;
  mutable std::mutex mu_;
};

/// Writes `bytes` to `path` atomically (temp file + rename).
void write_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace moose::api
