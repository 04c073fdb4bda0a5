#include "depsev/face.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "depsev/io.hpp"

namespace depsev::face {

Eigen::VectorXd frame_descriptor(const LandmarkPoints& points) {
  return geometric_vector(normalize_landmarks(points));
}

SecondSamples downsample_per_second(const LandmarkSequence& sequence) {
  SecondSamples out;
  const auto& frames = sequence.frames;
  if (frames.empty()) return out;
  const auto first = static_cast<long long>(std::ceil(frames.front().timestamp));
  const auto last = static_cast<long long>(std::floor(frames.back().timestamp));
  std::size_t cursor = 0;
  for (long long s = first; s <= last; ++s) {
    const double target = static_cast<double>(s);
    while (cursor + 1 < frames.size() && frames[cursor + 1].timestamp <= target) ++cursor;
    std::size_t best = cursor;
    if (cursor + 1 < frames.size() &&
        frames[cursor + 1].timestamp - target < target - frames[cursor].timestamp) {
      best = cursor + 1;
    }
    out.frame_index.push_back(best);
    out.valid.push_back(frames[best].success ? 1 : 0);
  }
  return out;
}

std::vector<std::size_t> window_starts(std::span<const std::uint8_t> valid,
                                       const WindowConfig& config) {
  if (config.window <= 0 || config.overlap < 0 || config.overlap >= config.window) {
    throw ArgumentError("window configuration needs window > overlap >= 0");
  }
  const auto window = static_cast<std::size_t>(config.window);
  const auto stride = static_cast<std::size_t>(config.window - config.overlap);
  std::vector<std::size_t> starts;
  for (std::size_t start = 0; start + window <= valid.size(); start += stride) {
    const bool clean = std::all_of(valid.begin() + static_cast<long>(start),
                                   valid.begin() + static_cast<long>(start + window),
                                   [](std::uint8_t v) { return v != 0; });
    if (clean) starts.push_back(start);
  }
  return starts;
}

namespace {

// Marks per-second samples whose landmarks cannot be normalized as invalid.
SecondSamples usable_samples(const LandmarkSequence& sequence,
                             std::vector<Eigen::VectorXd>* descriptors) {
  SecondSamples samples = downsample_per_second(sequence);
  if (descriptors) descriptors->assign(samples.frame_index.size(), Eigen::VectorXd());
  for (std::size_t i = 0; i < samples.frame_index.size(); ++i) {
    if (!samples.valid[i]) continue;
    try {
      auto d = frame_descriptor(sequence.frames[samples.frame_index[i]].points);
      if (descriptors) (*descriptors)[i] = std::move(d);
    } catch (const NumericError&) {
      samples.valid[i] = 0;
    }
  }
  return samples;
}

}  // namespace

Eigen::MatrixXd sampled_descriptors(const LandmarkSequence& sequence) {
  std::vector<Eigen::VectorXd> descriptors;
  const auto samples = usable_samples(sequence, &descriptors);
  const auto count = std::count(samples.valid.begin(), samples.valid.end(), 1);
  Eigen::MatrixXd out(count, kGeometricDim);
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < samples.valid.size(); ++i) {
    if (samples.valid[i]) out.row(row++) = descriptors[i].transpose();
  }
  return out;
}

WindowBatch window_sequence(const std::string& session_id, const LandmarkSequence& sequence,
                            const PcaProjection& pca, std::optional<double> label,
                            const WindowConfig& config) {
  WindowBatch batch;
  batch.config = config;
  batch.dimension = pca.dim();
  std::vector<Eigen::VectorXd> descriptors;
  const auto samples = usable_samples(sequence, &descriptors);
  for (const auto start : window_starts(samples.valid, config)) {
    Window w;
    w.session_id = session_id;
    w.start = start;
    w.label = label.value_or(std::numeric_limits<double>::quiet_NaN());
    w.samples.resize(config.window, pca.dim());
    for (int s = 0; s < config.window; ++s) {
      w.samples.row(s) = pca.project(descriptors[start + static_cast<std::size_t>(s)]).transpose();
    }
    batch.windows.push_back(std::move(w));
  }
  return batch;
}

void write_window_batch(const std::filesystem::path& path, const WindowBatch& batch) {
  std::string out = "# window=" + std::to_string(batch.config.window) +
                    " overlap=" + std::to_string(batch.config.overlap) +
                    " q=" + std::to_string(batch.dimension) + "\n";
  out += "session_id,start,step,label";
  for (Eigen::Index c = 0; c < batch.dimension; ++c) out += ",c" + std::to_string(c);
  out += '\n';
  for (const auto& w : batch.windows) {
    for (Eigen::Index s = 0; s < w.samples.rows(); ++s) {
      out += w.session_id + ',' + std::to_string(w.start) + ',' + std::to_string(s) + ',' +
             format_double(w.label);
      for (Eigen::Index c = 0; c < w.samples.cols(); ++c) {
        out += ',';
        out += format_double(w.samples(s, c));
      }
      out += '\n';
    }
  }
  write_text_file(path, out);
}

WindowBatch read_window_batch(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  const std::string source = path.string();
  std::string line;
  WindowBatch batch;
  if (!std::getline(in, line) ||
      std::sscanf(line.c_str(), "# window=%d overlap=%d q=%ld", &batch.config.window,
                  &batch.config.overlap, &batch.dimension) != 3) {
    throw ParseError(source, 1, "expected '# window=W overlap=O q=Q'");
  }
  std::getline(in, line);  // column header
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (static_cast<Eigen::Index>(fields.size()) != 4 + batch.dimension) {
      throw ParseError(source, line_no, "column count mismatch");
    }
    const auto start = static_cast<std::size_t>(std::stoull(fields[1]));
    const auto step = static_cast<Eigen::Index>(std::stoll(fields[2]));
    if (step == 0) {
      Window w;
      w.session_id = fields[0];
      w.start = start;
      w.label = fields[3] == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(fields[3]);
      w.samples.resize(batch.config.window, batch.dimension);
      batch.windows.push_back(std::move(w));
    }
    if (batch.windows.empty() || step >= batch.config.window) {
      throw ParseError(source, line_no, "window sample out of order");
    }
    auto& w = batch.windows.back();
    for (Eigen::Index c = 0; c < batch.dimension; ++c) {
      w.samples(step, c) = std::stod(fields[4 + static_cast<std::size_t>(c)]);
    }
  }
  return batch;
}

SessionScore aggregate_predictions(std::span<const double> window_predictions, double fallback) {
  if (window_predictions.empty()) return {fallback, true};
  double sum = 0.0;
  for (double p : window_predictions) sum += p;
  return {sum / static_cast<double>(window_predictions.size()), false};
}

}  // namespace depsev::face
