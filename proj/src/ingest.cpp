#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "probedrift/errors.hpp"
#include "probedrift/session.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace probedrift {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::optional<double> parse_number(const std::string& text) {
  double v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

std::vector<std::uint8_t> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IngestError("cannot open " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string dims(int h, int w) { return std::to_string(h) + "x" + std::to_string(w); }

}  // namespace

void validate_utterance(const Utterance& u) {
  if (u.frames.empty()) throw std::invalid_argument("utterance '" + u.id + "' has no frames");
  const Frame& first = u.frames.front();
  for (std::size_t i = 1; i < u.frames.size(); ++i) {
    if (u.frames[i].width != first.width || u.frames[i].height != first.height)
      throw std::invalid_argument("utterance '" + u.id + "' frame " + std::to_string(i) + " is " +
                                  dims(u.frames[i].height, u.frames[i].width) + ", expected " +
                                  dims(first.height, first.width));
  }
}

std::vector<std::string> session_problems(const Session& s) {
  std::vector<std::string> problems;
  if (s.utterances.empty()) {
    problems.emplace_back("empty session");
    return problems;
  }
  for (const Utterance& u : s.utterances) {
    try {
      validate_utterance(u);
    } catch (const std::invalid_argument& e) {
      problems.emplace_back(e.what());
    }
  }
  const Utterance& ref = s.utterances.front();
  for (const Utterance& u : s.utterances) {
    if (u.frames.empty() || ref.frames.empty()) continue;
    if (u.width() != ref.width() || u.height() != ref.height())
      problems.push_back("utterance '" + u.id + "' is " + dims(u.height(), u.width()) + ", but '" + ref.id +
                         "' is " + dims(ref.height(), ref.width()));
  }
  return problems;
}

void sort_utterances(Session& s) {
  std::stable_sort(s.utterances.begin(), s.utterances.end(), [](const Utterance& a, const Utterance& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.id < b.id;
  });
}

UltParams parse_ult_params(const fs::path& param_file) {
  std::ifstream in(param_file);
  if (!in) throw IngestError("missing parameter file " + param_file.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[trim(std::string_view(line).substr(0, eq))] = trim(std::string_view(line).substr(eq + 1));
  }
  auto number = [&](const std::string& key) -> std::optional<double> {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    const auto v = parse_number(it->second);
    if (!v) throw IngestError(param_file.string() + ": unparseable " + key + " '" + it->second + "'");
    return v;
  };
  auto required_count = [&](const std::string& key) {
    const auto v = number(key);
    if (!v) throw IngestError(param_file.string() + ": missing " + key);
    if (*v < 1 || *v != static_cast<double>(static_cast<int>(*v)))
      throw IngestError(param_file.string() + ": " + key + " must be a positive integer");
    return static_cast<int>(*v);
  };
  UltParams p;
  p.num_vectors = required_count("NumVectors");
  p.pix_per_vector = required_count("PixPerVector");
  p.frames_per_sec = number("FramesPerSec");
  p.time_of_first_frame = number("TimeInSecsOfFirstFrame");
  return p;
}

std::vector<Frame> slice_frames(const std::vector<std::uint8_t>& bytes, int width, int height,
                                const std::string& source) {
  const std::size_t frame_bytes = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  const std::size_t remainder = bytes.size() % frame_bytes;
  if (remainder != 0)
    throw IngestError(source + ": byte stream of " + std::to_string(bytes.size()) +
                      " bytes is not a whole number of " + dims(height, width) + " frames (remainder " +
                      std::to_string(remainder) + ")");
  std::vector<Frame> frames;
  frames.reserve(bytes.size() / frame_bytes);
  for (std::size_t off = 0; off < bytes.size(); off += frame_bytes) {
    frames.emplace_back(width, height,
                        std::vector<std::uint8_t>(bytes.begin() + static_cast<std::ptrdiff_t>(off),
                                                  bytes.begin() + static_cast<std::ptrdiff_t>(off + frame_bytes)));
  }
  return frames;
}

namespace {

void check_session(const Session& s, const std::string& source) {
  const auto problems = session_problems(s);
  if (problems.empty()) return;
  std::string msg = source + ": inconsistent session";
  for (const auto& p : problems) msg += "\n  " + p;
  throw IngestError(msg);
}

}  // namespace

Session load_ultrasuite_session(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IngestError("input directory not found: " + dir.string());
  std::vector<fs::path> streams;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".ult") streams.push_back(entry.path());
  if (streams.empty()) throw IngestError("no utterances found in " + dir.string());
  std::sort(streams.begin(), streams.end());

  Session s;
  s.speaker_id = dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string();
  s.utterances.reserve(streams.size());
  for (std::size_t i = 0; i < streams.size(); ++i) {
    const fs::path& ult = streams[i];
    fs::path param = ult;
    param.replace_extension(".param");
    const UltParams p = parse_ult_params(param);
    Utterance u;
    u.id = ult.stem().string();
    // The sidecar offset is relative to each recording's own audio, so it
    // cannot order utterances; filename order stands in for session time.
    u.timestamp = static_cast<double>(i);
    u.frames = slice_frames(read_bytes(ult), p.pix_per_vector, p.num_vectors, ult.string());
    if (u.frames.empty()) throw IngestError(ult.string() + ": no frames");
    u.frame_rate = p.frames_per_sec;
    u.first_frame_offset = p.time_of_first_frame;
    s.utterances.push_back(std::move(u));
  }
  check_session(s, dir.string());
  sort_utterances(s);
  return s;
}

Session load_manifest_session(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw IngestError("manifest not found: " + manifest_path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw IngestError(manifest_path.string() + ": " + e.what());
  }
  const std::string src = manifest_path.string();
  auto schema = [&](const std::string& what) { return IngestError(src + ": schema violation: " + what); };
  if (!doc.is_object()) throw schema("top level must be an object");
  for (const char* key : {"speaker_id", "session_id"})
    if (!doc.contains(key) || !doc[key].is_string()) throw schema(std::string("'") + key + "' must be a string");
  if (!doc.contains("utterances") || !doc["utterances"].is_array()) throw schema("'utterances' must be an array");

  Session s;
  s.speaker_id = doc["speaker_id"].get<std::string>();
  s.session_id = doc["session_id"].get<std::string>();
  const json& entries = doc["utterances"];
  if (entries.empty()) throw IngestError(src + ": empty session");

  const fs::path base = manifest_path.parent_path();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const json& e = entries[i];
    const std::string where = "utterances[" + std::to_string(i) + "]";
    if (!e.is_object()) throw schema(where + " must be an object");
    if (!e.contains("id") || !e["id"].is_string()) throw schema(where + ".id must be a string");
    if (!e.contains("file") || !e["file"].is_string()) throw schema(where + ".file must be a string");
    for (const char* key : {"width", "height"})
      if (!e.contains(key) || !e[key].is_number_integer() || e[key].get<long long>() < 1)
        throw schema(where + "." + key + " must be a positive integer");
    if (e.contains("timestamp") && !e["timestamp"].is_number()) throw schema(where + ".timestamp must be a number");

    Utterance u;
    u.id = e["id"].get<std::string>();
    u.timestamp = e.contains("timestamp") ? e["timestamp"].get<double>() : static_cast<double>(i);
    if (e.contains("frame_rate") && e["frame_rate"].is_number()) u.frame_rate = e["frame_rate"].get<double>();
    if (e.contains("first_frame_offset") && e["first_frame_offset"].is_number())
      u.first_frame_offset = e["first_frame_offset"].get<double>();
    const fs::path file = base / e["file"].get<std::string>();
    if (!fs::is_regular_file(file)) throw IngestError(src + ": " + where + " references missing file " + file.string());
    u.frames = slice_frames(read_bytes(file), e["width"].get<int>(), e["height"].get<int>(), file.string());
    if (u.frames.empty()) throw IngestError(file.string() + ": no frames");
    s.utterances.push_back(std::move(u));
  }
  check_session(s, src);
  sort_utterances(s);
  return s;
}

fs::path write_manifest_session(const Session& s, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IngestError("cannot create " + dir.string() + ": " + ec.message());
  json doc;
  doc["speaker_id"] = s.speaker_id;
  doc["session_id"] = s.session_id;
  doc["utterances"] = json::array();
  for (const Utterance& u : s.utterances) {
    validate_utterance(u);
    if (u.id.empty() || u.id.find_first_of("/\\") != std::string::npos)
      throw IngestError("utterance id '" + u.id + "' cannot name a file");
    const std::string file = u.id + ".raw";
    std::ofstream out(dir / file, std::ios::binary);
    for (const Frame& f : u.frames)
      out.write(reinterpret_cast<const char*>(f.pixels.data()), static_cast<std::streamsize>(f.pixels.size()));
    if (!out) throw IngestError("cannot write " + (dir / file).string());
    json e = {{"id", u.id}, {"timestamp", u.timestamp}, {"file", file}, {"width", u.width()}, {"height", u.height()}};
    if (u.frame_rate) e["frame_rate"] = *u.frame_rate;
    if (u.first_frame_offset) e["first_frame_offset"] = *u.first_frame_offset;
    doc["utterances"].push_back(std::move(e));
  }
  const fs::path manifest = dir / "manifest.json";
  std::ofstream out(manifest);
  out << doc.dump(2) << '\n';
  if (!out) throw IngestError("cannot write " + manifest.string());
  return manifest;
}

}  // namespace probedrift
