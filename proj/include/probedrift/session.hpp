#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "probedrift/image.hpp"

namespace probedrift {

/// One recording: every frame including leading and trailing silence.
struct Utterance {
  std::string id;
  double timestamp = 0.0;  // seconds, or ordinal when the source has no clock
  std::vector<Frame> frames;
  std::optional<double> frame_rate;
  std::optional<double> first_frame_offset;  // TimeInSecsOfFirstFrame, when known

  int width() const { return frames.empty() ? 0 : frames.front().width; }
  int height() const { return frames.empty() ? 0 : frames.front().height; }

  friend bool operator==(const Utterance&, const Utterance&) = default;
};

struct Session {
  std::string speaker_id;
  std::string session_id;
  std::vector<Utterance> utterances;

  std::size_t size() const { return utterances.size(); }

  friend bool operator==(const Session&, const Session&) = default;
};

/// Throws std::invalid_argument on an empty utterance or mixed frame sizes.
void validate_utterance(const Utterance& u);

/// Returns a description of every structural problem in the session (empty
/// when valid). Dimension mismatches are reported against the first
/// utterance, naming each offender.
std::vector<std::string> session_problems(const Session& s);

/// Stable order: timestamp ascending, then id.
void sort_utterances(Session& s);

/// Reads a directory of `<name>.ult` + `<name>.param` pairs. Throws IngestError.
Session load_ultrasuite_session(const std::filesystem::path& dir);

/// Reads a JSON manifest (speaker_id, session_id, utterances[]). Each entry's
/// `file` is a raw 8-bit frame stream relative to the manifest. Throws
/// IngestError.
Session load_manifest_session(const std::filesystem::path& manifest_path);

/// Writes `manifest.json` plus one `<id>.raw` stream per utterance into `dir`.
std::filesystem::path write_manifest_session(const Session& s, const std::filesystem::path& dir);

/// Parsed UltraSuite parameter sidecar.
struct UltParams {
  int num_vectors = 0;
  int pix_per_vector = 0;
  std::optional<double> frames_per_sec;
  std::optional<double> time_of_first_frame;
};

UltParams parse_ult_params(const std::filesystem::path& param_file);

/// Slices a flat byte stream into frames. Throws IngestError naming `source`
/// and the remainder when the stream is not a whole number of frames.
std::vector<Frame> slice_frames(const std::vector<std::uint8_t>& bytes, int width, int height,
                                const std::string& source);

struct ShiftBoundary {
  int index = 0;  // first utterance using the shifted image
  int dy = 0;     // rows
  int dx = 0;     // columns

  friend bool operator==(const ShiftBoundary&, const ShiftBoundary&) = default;
};

struct SyntheticSpec {
  int n_utterances = 10;
  int frames_per_utterance = 4;
  int width = 64;
  int height = 32;
  std::vector<ShiftBoundary> shift_boundaries;
  double noise_sigma = 0.0;
  std::uint64_t texture_seed = 1;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Band-limited texture with values inside [low, high]; periodic so circular
/// shifts stay seamless.
Grid<double> band_limited_texture(int width, int height, std::uint64_t seed, double blur_sigma = 2.0,
                                  double low = 40.0, double high = 215.0);

/// Circular shift: output(r, c) = input(r - dy, c - dx).
Grid<double> circular_shift(const Grid<double>& g, int dy, int dx);

Session generate_synthetic_session(const SyntheticSpec& spec);

/// JSON form: n_utterances, frames_per_utterance, width, height, noise_sigma,
/// texture_seed, shift_boundaries: [{index, dy, dx}]. Missing keys keep their
/// defaults; wrong types throw std::invalid_argument naming the field.
SyntheticSpec parse_synthetic_spec(const std::string& json_text);
std::string synthetic_spec_to_json(const SyntheticSpec& spec);

}  // namespace probedrift
