#include "mtlw/data/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "mtlw/data/feature_file.hpp"
#include "mtlw/errors.hpp"

namespace mtlw::data {

namespace {

constexpr std::size_t kColumns = 2 + net::kEmotionDims + 3;

std::string header_line() {
  std::string h = "sample_id,split";
  for (std::size_t d = 0; d < net::kEmotionDims; ++d) h += ",emo_" + std::to_string(d);
  return h + ",country,age,feature_file";
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T parse_number(const std::string& text, const std::string& sample_id, const char* column) {
  T value{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw LoadError("sample " + sample_id + ": malformed " + column + " value \"" + text + "\"");
  }
  return value;
}

void validate_entry(const ManifestEntry& e) {
  for (std::size_t d = 0; d < net::kEmotionDims; ++d) {
    const double v = e.emotions[d];
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw LoadError("sample " + e.sample_id + ": emo_" + std::to_string(d) + "=" + format_double(v) +
                      " outside [0, 1]");
    }
  }
  if (e.country < 0 || e.country >= static_cast<int>(net::kNumCountries)) {
    throw LoadError("sample " + e.sample_id + ": country=" + std::to_string(e.country) + " outside 0..3");
  }
  if (!std::isfinite(e.age) || !(e.age > 0.0)) {
    throw LoadError("sample " + e.sample_id + ": age=" + format_double(e.age) + " must be positive");
  }
  if (e.feature_file.empty()) throw LoadError("sample " + e.sample_id + ": empty feature_file");
}

void validate_manifest(const DatasetManifest& manifest) {
  std::set<std::string> seen;
  std::array<std::size_t, 3> counts{};
  for (const ManifestEntry& e : manifest.entries) {
    if (e.sample_id.empty()) throw LoadError("manifest: empty sample_id");
    if (!seen.insert(e.sample_id).second) throw LoadError("sample " + e.sample_id + ": duplicate sample_id");
    validate_entry(e);
    ++counts[static_cast<std::size_t>(e.split)];
  }
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest}) {
    if (counts[static_cast<std::size_t>(s)] == 0) {
      throw LoadError("manifest: empty split \"" + std::string(split_name(s)) + "\"");
    }
  }
}

}  // namespace

std::string_view split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

std::optional<Split> parse_split(std::string_view name) {
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest}) {
    if (split_name(s) == name) return s;
  }
  return std::nullopt;
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << header_line() << '\n';
  for (const ManifestEntry& e : manifest.entries) {
    out << e.sample_id << ',' << split_name(e.split);
    for (double v : e.emotions) out << ',' << format_double(v);
    out << ',' << e.country << ',' << format_double(e.age) << ',' << e.feature_file << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open manifest " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != header_line()) {
    throw LoadError("manifest " + path.string() + ": unexpected header");
  }

  DatasetManifest manifest;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv(line);
    const std::string id = fields.empty() || fields[0].empty() ? "<row " + std::to_string(row) + ">" : fields[0];
    if (fields.size() != kColumns) {
      throw LoadError("sample " + id + ": expected " + std::to_string(kColumns) + " columns, got " +
                      std::to_string(fields.size()));
    }
    ManifestEntry e;
    e.sample_id = fields[0];
    const auto split = parse_split(fields[1]);
    if (!split) throw LoadError("sample " + id + ": unknown split \"" + fields[1] + "\"");
    e.split = *split;
    for (std::size_t d = 0; d < net::kEmotionDims; ++d) e.emotions[d] = parse_number<double>(fields[2 + d], id, "emo");
    e.country = parse_number<int>(fields[2 + net::kEmotionDims], id, "country");
    e.age = parse_number<double>(fields[3 + net::kEmotionDims], id, "age");
    e.feature_file = fields[4 + net::kEmotionDims];
    manifest.entries.push_back(std::move(e));
  }
  validate_manifest(manifest);
  return manifest;
}

// ---------------------------------------------------------------------------

Dataset::Dataset(std::size_t height, std::size_t width, std::vector<Sample> samples, std::vector<Split> splits)
    : height_(height), width_(width), samples_(std::move(samples)) {
  if (splits.size() != samples_.size()) throw StructuralError("dataset: one split per sample required");
  if (height_ == 0 || width_ == 0) throw StructuralError("dataset: zero feature dimension");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (samples_[i].features.size() != height_ * width_) {
      throw StructuralError("dataset: sample " + samples_[i].sample_id + " has wrong feature size");
    }
    split_indices_[static_cast<std::size_t>(splits[i])].push_back(i);
  }
}

const std::vector<std::size_t>& Dataset::indices(Split split) const {
  return split_indices_[static_cast<std::size_t>(split)];
}

Dataset load_dataset(const std::filesystem::path& manifest_path) {
  const DatasetManifest manifest = read_manifest(manifest_path);
  const std::filesystem::path root = manifest_path.parent_path();

  std::vector<Sample> samples;
  std::vector<Split> splits;
  std::size_t height = 0, width = 0;
  for (const ManifestEntry& e : manifest.entries) {
    FeatureGrid grid;
    try {
      grid = read_feature_file(root / e.feature_file);
    } catch (const LoadError& err) {
      throw LoadError("sample " + e.sample_id + ": " + err.what());
    }
    if (samples.empty()) {
      height = grid.height;
      width = grid.width;
    } else if (grid.height != height || grid.width != width) {
      throw LoadError("sample " + e.sample_id + ": feature grid " + std::to_string(grid.height) + "x" +
                      std::to_string(grid.width) + " differs from " + std::to_string(height) + "x" +
                      std::to_string(width));
    }
    for (float v : grid.values) {
      if (!std::isfinite(v)) throw LoadError("sample " + e.sample_id + ": non-finite feature value");
    }
    samples.push_back({e.sample_id, std::move(grid.values), e.emotions, e.country, e.age});
    splits.push_back(e.split);
  }
  return Dataset(height, width, std::move(samples), std::move(splits));
}

// ---------------------------------------------------------------------------

std::vector<BatchPlan> batches(const Dataset& dataset, Split split, std::size_t batch_size, std::uint64_t seed,
                               std::size_t crop_width, std::size_t epoch) {
  if (batch_size == 0) throw StructuralError("batches: batch_size must be positive");
  if (crop_width == 0 || crop_width > dataset.width()) {
    throw StructuralError("batches: crop_width " + std::to_string(crop_width) + " exceeds feature width " +
                          std::to_string(dataset.width()));
  }
  std::vector<std::size_t> order = dataset.indices(split);
  const std::size_t slack = dataset.width() - crop_width;
  std::vector<std::size_t> offsets(order.size(), slack / 2);

  if (split == Split::kTrain) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(epoch), 0x7261696eu};
    std::mt19937_64 rng(seq);
    std::shuffle(order.begin(), order.end(), rng);
    std::uniform_int_distribution<std::size_t> offset_dist(0, slack);
    for (std::size_t& o : offsets) o = offset_dist(rng);
  }

  std::vector<BatchPlan> plans;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    BatchPlan plan;
    plan.indices.assign(order.begin() + start, order.begin() + end);
    plan.offsets.assign(offsets.begin() + start, offsets.begin() + end);
    plans.push_back(std::move(plan));
  }
  return plans;
}

Batch make_batch(const Dataset& dataset, const BatchPlan& plan, std::size_t crop_width) {
  const std::size_t b = plan.indices.size();
  const std::size_t h = dataset.height();
  const std::size_t w = dataset.width();
  if (b == 0 || plan.offsets.size() != b) throw StructuralError("make_batch: malformed batch plan");

  std::vector<double> x(b * h * crop_width);
  Batch batch;
  batch.indices = plan.indices;
  for (std::size_t i = 0; i < b; ++i) {
    const Sample& s = dataset.sample(plan.indices[i]);
    const std::size_t off = plan.offsets[i];
    if (off + crop_width > w) throw StructuralError("make_batch: crop exceeds feature width");
    for (std::size_t row = 0; row < h; ++row) {
      const float* src = s.features.data() + row * w + off;
      std::copy(src, src + crop_width, x.begin() + (i * h + row) * crop_width);
    }
    batch.emotions.insert(batch.emotions.end(), s.emotions.begin(), s.emotions.end());
    batch.countries.push_back(s.country);
    batch.ages.push_back(s.age);
  }
  batch.features = ad::Tensor::from({b, 1, h, crop_width}, std::move(x));
  return batch;
}

}  // namespace mtlw::data
