#include "moose/api/store.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>

#include "moose/core/digest.hpp"
#include "moose/explore/corpus_io.hpp"

namespace moose::api {

namespace fs = std::filesystem;

namespace {

bool safe_name(const std::string& s) {
  if (s.empty() || s.size() > 128) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') return false;
  return true;
}

}  // namespace

void write_atomic(const fs::path& path, std::string_view bytes) {
  static std::atomic<std::uint64_t> counter{0};
  const fs::path tmp = path.string() + ".tmp" + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error(Errc::Io, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(Errc::Io, "cannot rename into " + path.string());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::NotFound, "no file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Store::Store(fs::path root) : root_(std::move(root)) {
  fs::create_directories(root_ / "corpora");
  fs::create_directories(root_ / "sessions");
}

fs::path Store::corpus_path(const std::string& id) const { return root_ / "corpora" / (id + ".jsonl"); }
fs::path Store::session_path(const SessionId& id) const { return root_ / "sessions" / (id.value + ".json"); }

std::string Store::put_corpus(std::string_view jsonl) {
  const std::string id = sha256_hex(jsonl);
  explore::parse_corpus(jsonl, id);
  std::lock_guard lock(mu_);
  if (!fs::exists(corpus_path(id))) write_atomic(corpus_path(id), jsonl);
  return id;
}

bool Store::has_corpus(const std::string& id) const {
  return safe_name(id) && fs::exists(corpus_path(id));
}

InspirationCorpus Store::corpus(const std::string& id) const {
  if (!has_corpus(id)) throw Error(Errc::NotFound, "unknown corpus " + id);
  return explore::parse_corpus(read_file(corpus_path(id)), id);
}

void Store::save(const protocol::SessionState& session) {
  const auto bytes = protocol::export_bytes(session);
  std::lock_guard lock(mu_);
  write_atomic(session_path(session.id()), bytes);
}

protocol::SessionState Store::load(const SessionId& id) const {
  if (!safe_name(id.value) || !fs::exists(session_path(id))) throw Error(Errc::NotFound, "unknown session " + id.value);
  return protocol::restore(read_file(session_path(id)));
}

std::vector<SessionId> Store::sessions() const {
  std::vector<SessionId> out;
  for (const auto& entry : fs::directory_iterator(root_ / "sessions"))
    if (entry.path().extension() == ".json") out.emplace_back(entry.path().stem().string());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace moose::api
