#include "gaitgender/model_io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>

#include <json.hpp>
#include <zlib.h>

#include "gaitgender/error.hpp"

namespace gaitgender {

namespace {

using json = nlohmann::ordered_json;

constexpr char kMagic[8] = {'G', 'A', 'I', 'T', 'M', 'D', 'L', '\n'};
constexpr std::size_t kPrefix = 8 + 4 + 8;

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

template <typename T>
T get_le(const std::uint8_t* p) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(p[i]) << (8 * i);
  return v;
}

std::uint32_t crc_of(const std::uint8_t* data, std::size_t size) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in pieces.
  while (size > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
    crc = crc32(crc, data, chunk);
    data += chunk;
    size -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

json params_object(const PipelineParams& p) {
  return {{"norm_height", p.norm.height},
          {"norm_width", p.norm.width},
          {"bins", p.bins},
          {"smoothing_window", p.smoothing_window},
          {"frame_rate", p.window.frame_rate},
          {"cycle_time", p.window.cycle_time},
          {"T", p.T()},
          {"views", p.views},
          {"C", p.svm.C},
          {"max_iter", p.svm.max_iter},
          {"tolerance", p.svm.tolerance},
          {"seed", p.svm.seed},
          {"train_stride", p.train_stride},
          {"reference_refinements", p.reference_refinements},
          {"attachment_removal", p.attachment_removal},
          {"renormalize_after_removal", p.renormalize_after_removal}};
}

PipelineParams params_from(const json& j) {
  PipelineParams p;
  auto get = [&j](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
  };
  get("norm_height", p.norm.height);
  get("norm_width", p.norm.width);
  get("bins", p.bins);
  get("smoothing_window", p.smoothing_window);
  get("frame_rate", p.window.frame_rate);
  get("cycle_time", p.window.cycle_time);
  get("views", p.views);
  get("C", p.svm.C);
  get("max_iter", p.svm.max_iter);
  get("tolerance", p.svm.tolerance);
  get("seed", p.svm.seed);
  get("train_stride", p.train_stride);
  get("reference_refinements", p.reference_refinements);
  get("attachment_removal", p.attachment_removal);
  get("renormalize_after_removal", p.renormalize_after_removal);
  if (j.contains("T") && j.at("T").get<int>() != p.T()) {
    throw Error(ErrorCode::ShapeInconsistency, "T disagrees with frame_rate * cycle_time");
  }
  return p;
}

struct ArrayRef {
  std::string name;
  Eigen::Index rows;
  Eigen::Index cols;
  const double* data;
};

std::string key(const char* kind, int view) { return std::string(kind) + "/" + std::to_string(view); }

}  // namespace

std::vector<std::uint8_t> serialize_model(const TrainedModel& model) {
  std::vector<ArrayRef> arrays;
  for (const auto& [view, t] : model.vp.templates) arrays.push_back({key("vp", view), t.rows(), t.cols(), t.data()});
  for (const auto& [view, e] : model.ds.envelopes) {
    arrays.push_back({key("mads", view), 1, e.upper.size(), e.upper.data()});
    arrays.push_back({key("mids", view), 1, e.lower.size(), e.lower.data()});
  }
  for (const auto& [view, c] : model.bank) {
    arrays.push_back({key("weights", view), 1, c.weights.size(), c.weights.data()});
    arrays.push_back({key("bias", view), 1, 1, &c.bias});
  }

  json header;
  header["format"] = "gaitgender-model";
  header["version"] = kModelFormatVersion;
  header["params"] = params_object(model.params);
  header["envelopes"] = "pointwise max/min over all training frames of all subjects, per view";
  header["dataset_fingerprint"] = model.dataset_fingerprint;
  json list = json::array();
  for (const auto& a : arrays) list.push_back({{"name", a.name}, {"rows", a.rows}, {"cols", a.cols}});
  header["arrays"] = std::move(list);
  const std::string text = header.dump();

  std::vector<std::uint8_t> out(kMagic, kMagic + 8);
  put_le<std::uint32_t>(out, kModelFormatVersion);
  put_le<std::uint64_t>(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& a : arrays) {
    for (Eigen::Index i = 0; i < a.rows * a.cols; ++i) put_le(out, std::bit_cast<std::uint64_t>(a.data[i]));
  }
  put_le<std::uint32_t>(out, crc_of(out.data(), out.size()));
  return out;
}

TrainedModel deserialize_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kPrefix || std::memcmp(bytes.data(), kMagic, 8) != 0) {
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), kMagic, 8) != 0) {
      throw Error(ErrorCode::VersionMismatch, "not a gaitgender model file");
    }
    throw Error(ErrorCode::ChecksumMismatch, "model file is truncated");
  }
  const auto version = get_le<std::uint32_t>(bytes.data() + 8);
  if (version != kModelFormatVersion) {
    throw Error(ErrorCode::VersionMismatch, "model format version " + std::to_string(version) +
                                                ", expected " + std::to_string(kModelFormatVersion));
  }
  if (bytes.size() < kPrefix + 4 ||
      get_le<std::uint32_t>(bytes.data() + bytes.size() - 4) != crc_of(bytes.data(), bytes.size() - 4)) {
    throw Error(ErrorCode::ChecksumMismatch, "model file checksum does not match its contents");
  }

  const auto header_len = get_le<std::uint64_t>(bytes.data() + 12);
  const std::size_t body_end = bytes.size() - 4;
  if (header_len > body_end - kPrefix) throw Error(ErrorCode::ShapeInconsistency, "header overruns the file");
  json header;
  try {
    header = json::parse(bytes.begin() + kPrefix, bytes.begin() + static_cast<std::ptrdiff_t>(kPrefix + header_len));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ShapeInconsistency, std::string("bad model header: ") + e.what());
  }

  TrainedModel model;
  try {
    model.params = params_from(header.at("params"));
    model.dataset_fingerprint = header.value("dataset_fingerprint", "");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ShapeInconsistency, std::string("bad model params: ") + e.what());
  }
  const PipelineParams& p = model.params;
  model.vp.norm_height = p.norm.height;
  model.vp.norm_width = p.norm.width;
  model.ds.bins = p.bins;
  model.ds.smoothing_window = p.smoothing_window;

  const std::set<int> views(p.views.begin(), p.views.end());
  const Eigen::Index lower_rows = p.norm.height - lower_band_start(p.norm.height);
  const Eigen::Index features = static_cast<Eigen::Index>(p.norm.height) * p.norm.width;
  std::size_t offset = kPrefix + header_len;
  std::map<std::string, int> seen;

  try {
    for (const auto& entry : header.at("arrays")) {
      const std::string name = entry.at("name").get<std::string>();
      const auto rows = entry.at("rows").get<Eigen::Index>();
      const auto cols = entry.at("cols").get<Eigen::Index>();
      const auto slash = name.find('/');
      if (slash == std::string::npos || rows < 0 || cols < 0) {
        throw Error(ErrorCode::ShapeInconsistency, "malformed array entry '" + name + "'");
      }
      const std::string kind = name.substr(0, slash);
      const int view = std::stoi(name.substr(slash + 1));
      if (!views.contains(view)) {
        throw Error(ErrorCode::ShapeInconsistency, "array " + name + " is for a view not in params");
      }
      const std::size_t count = static_cast<std::size_t>(rows * cols);
      if (count > (body_end - offset) / 8) throw Error(ErrorCode::ShapeInconsistency, "array " + name + " overruns the file");
      auto read = [&](double* dst) {
        for (std::size_t i = 0; i < count; ++i) {
          dst[i] = std::bit_cast<double>(get_le<std::uint64_t>(bytes.data() + offset + 8 * i));
        }
        offset += 8 * count;
      };
      auto expect = [&](Eigen::Index r, Eigen::Index c) {
        if (rows != r || cols != c) {
          throw Error(ErrorCode::ShapeInconsistency, "array " + name + " has shape " + std::to_string(rows) +
                                                         "x" + std::to_string(cols) + ", expected " +
                                                         std::to_string(r) + "x" + std::to_string(c));
        }
      };
      if (kind == "vp") {
        expect(lower_rows, p.norm.width);
        Image<double>& t = model.vp.templates[view];
        t.resize(rows, cols);
        read(t.data());
      } else if (kind == "mads" || kind == "mids") {
        expect(1, p.bins);
        Envelope& e = model.ds.envelopes[view];
        Eigen::ArrayXd& a = kind == "mads" ? e.upper : e.lower;
        a.resize(cols);
        read(a.data());
      } else if (kind == "weights") {
        expect(1, features);
        LinearClassifier<double>& c = model.bank[view];
        c.view = view;
        c.weights.resize(cols);
        read(c.weights.data());
      } else if (kind == "bias") {
        expect(1, 1);
        read(&model.bank[view].bias);
      } else {
        throw Error(ErrorCode::ShapeInconsistency, "unknown array kind '" + kind + "'");
      }
      ++seen[kind];
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ShapeInconsistency, std::string("bad array list: ") + e.what());
  } catch (const std::logic_error& e) {
    throw Error(ErrorCode::ShapeInconsistency, std::string("bad array name: ") + e.what());
  }
  if (offset != body_end) throw Error(ErrorCode::ShapeInconsistency, "trailing bytes after the arrays");
  for (const char* kind : {"vp", "mads", "mids", "weights", "bias"}) {
    if (seen[kind] != static_cast<int>(views.size())) {
      throw Error(ErrorCode::ShapeInconsistency, std::string("params list ") + std::to_string(views.size()) +
                                                     " views but the file has " + std::to_string(seen[kind]) +
                                                     " '" + kind + "' arrays");
    }
  }
  return model;
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  const auto bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return deserialize_model(bytes);
}

std::string model_hash(const TrainedModel& model) {
  const auto bytes = serialize_model(model);
  char buf[16];
  // The trailing CRC itself: a CRC over data plus its own CRC is a constant.
  std::snprintf(buf, sizeof buf, "%08x", static_cast<unsigned>(crc_of(bytes.data(), bytes.size() - 4)));
  return buf;
}

std::string params_to_json(const PipelineParams& params) { return params_object(params).dump(); }

PipelineParams parse_params(std::string_view json_text) {
  try {
    const json j = json::parse(json_text);
    return params_from(j.contains("params") ? j.at("params") : j);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("bad params JSON: ") + e.what());
  }
}

PipelineParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_params(text);
}

}  // namespace gaitgender
