#include "gcr/io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <vector>

#include <json.hpp>

#include "gcr/util.hpp"

namespace gcr::io {

namespace {

using nlohmann::json;

void write_doubles(std::ofstream& out, const double* data, std::size_t count) {
  // host is little-endian; bytes go out verbatim
  out.write(reinterpret_cast<const char*>(data),
            std::streamsize(count * sizeof(double)));
}

std::vector<double> read_doubles(std::ifstream& in, std::size_t count) {
  std::vector<double> data(count);
  in.read(reinterpret_cast<char*>(data.data()),
          std::streamsize(count * sizeof(double)));
  if (!in) throw Error("truncated binary payload");
  return data;
}

json read_header_line(std::ifstream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("missing header line");
  return json::parse(line);
}

std::ofstream open_out(const std::filesystem::path& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path, bool binary) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw Error("cannot open for reading: " + path.string());
  return in;
}

json intrinsics_to_json(const CameraIntrinsics& k) {
  return json{{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx},
              {"cy", k.cy}, {"width", k.width}, {"height", k.height}};
}

CameraIntrinsics intrinsics_from_json(const json& j) {
  CameraIntrinsics k;
  k.fx = j.at("fx").get<double>();
  k.fy = j.at("fy").get<double>();
  k.cx = j.at("cx").get<double>();
  k.cy = j.at("cy").get<double>();
  k.width = j.at("width").get<int>();
  k.height = j.at("height").get<int>();
  validate(k);
  return k;
}

json pose_to_json_value(const Pose& p) {
  const Mat3& r = p.rotation.matrix();
  json rows = json::array();
  for (int i = 0; i < 3; ++i)
    rows.push_back(json::array({r(i, 0), r(i, 1), r(i, 2)}));
  return json{{"R", rows},
              {"t", json::array({p.translation.x(), p.translation.y(),
                                 p.translation.z()})}};
}

Pose pose_from_json_value(const json& j) {
  Mat3 r;
  const auto& rows = j.at("R");
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < 3; ++c) r(i, c) = rows.at(i).at(c).get<double>();
  Pose p;
  p.rotation = RotationMatrix::from_matrix(r);
  const auto& t = j.at("t");
  p.translation = Vec3(t.at(0).get<double>(), t.at(1).get<double>(),
                       t.at(2).get<double>());
  return p;
}

}  // namespace

void save_depth_map(const DepthMap& m, const std::filesystem::path& path) {
  auto out = open_out(path, true);
  json header{{"width", m.width}, {"height", m.height}, {"dim", 1}};
  out << header.dump() << '\n';
  std::vector<double> values = m.values;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!m.valid[i]) values[i] = std::numeric_limits<double>::quiet_NaN();
  write_doubles(out, values.data(), values.size());
  if (!out) throw Error("write failed: " + path.string());
}

DepthMap load_depth_map(const std::filesystem::path& path) {
  auto in = open_in(path, true);
  const json header = read_header_line(in);
  DepthMap m;
  m.width = header.at("width").get<int>();
  m.height = header.at("height").get<int>();
  if (header.at("dim").get<int>() != 1) throw Error("depth map: dim must be 1");
  if (m.width <= 0 || m.height <= 0) throw Error("depth map: bad dimensions");
  m.values = read_doubles(in, std::size_t(m.width) * m.height);
  m.valid.resize(m.values.size());
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    const bool ok = std::isfinite(m.values[i]) && m.values[i] > 0.0;
    m.valid[i] = ok ? 1 : 0;
    if (!ok) m.values[i] = 0.0;
  }
  return m;
}

void save_descriptor_field(const DescriptorField& f,
                           const std::filesystem::path& path) {
  auto out = open_out(path, true);
  json header{{"width", f.width}, {"height", f.height}, {"dim", f.dim}};
  out << header.dump() << '\n';
  write_doubles(out, f.descriptors.data(), f.descriptors.size());
  write_doubles(out, f.confidence.data(), f.confidence.size());
  if (!out) throw Error("write failed: " + path.string());
}

DescriptorField load_descriptor_field(const std::filesystem::path& path) {
  auto in = open_in(path, true);
  const json header = read_header_line(in);
  DescriptorField f;
  f.width = header.at("width").get<int>();
  f.height = header.at("height").get<int>();
  f.dim = header.at("dim").get<int>();
  if (f.width <= 0 || f.height <= 0 || f.dim <= 0)
    throw Error("descriptor field: bad dimensions");
  const std::size_t pixels = std::size_t(f.width) * f.height;
  f.descriptors = read_doubles(in, pixels * f.dim);
  f.confidence = read_doubles(in, pixels);
  return f;
}

std::string pose_to_json(const Pose& p) {
  const Mat3& r = p.rotation.matrix();
  std::string out = "{\"R\": [";
  for (int i = 0; i < 3; ++i) {
    out += i ? ", [" : "[";
    for (int c = 0; c < 3; ++c) {
      if (c) out += ", ";
      out += format_g17(r(i, c));
    }
    out += "]";
  }
  out += "], \"t\": [";
  for (int c = 0; c < 3; ++c) {
    if (c) out += ", ";
    out += format_g17(p.translation(c));
  }
  out += "]}";
  return out;
}

Pose pose_from_json(const std::string& text) {
  return pose_from_json_value(json::parse(text));
}

void save_pose(const Pose& p, const std::filesystem::path& path) {
  write_text_file(path, pose_to_json(p) + "\n");
}

Pose load_pose(const std::filesystem::path& path) {
  return pose_from_json(read_text_file(path));
}

std::string scene_to_json(const Scene& s) {
  json j{{"seed", s.seed},
         {"descriptor_seed", s.descriptor_seed},
         {"descriptor_dim", s.descriptor_dim},
         {"descriptor_freq_scale", s.descriptor_freq_scale},
         {"k1", intrinsics_to_json(s.k1)},
         {"k2", intrinsics_to_json(s.k2)},
         {"gt_pose", pose_to_json_value(s.gt_pose)},
         {"plane",
          {{"normal", json::array({s.plane_normal.x(), s.plane_normal.y(),
                                   s.plane_normal.z()})},
           {"offset", s.plane_offset}}},
         {"noise",
          {{"pixel_sigma", s.noise.pixel_sigma},
           {"depth_sigma", s.noise.depth_sigma},
           {"outlier_fraction", s.noise.outlier_fraction},
           {"descriptor_corruption_sigma",
            s.noise.descriptor_corruption_sigma}}}};
  return j.dump(2) + "\n";
}

Scene scene_from_json(const std::string& text) {
  const json j = json::parse(text);
  Scene s;
  s.seed = j.at("seed").get<std::uint64_t>();
  s.descriptor_seed = j.at("descriptor_seed").get<std::uint64_t>();
  s.descriptor_dim = j.at("descriptor_dim").get<int>();
  s.descriptor_freq_scale = j.at("descriptor_freq_scale").get<double>();
  s.k1 = intrinsics_from_json(j.at("k1"));
  s.k2 = intrinsics_from_json(j.at("k2"));
  s.gt_pose = pose_from_json_value(j.at("gt_pose"));
  const auto& n = j.at("plane").at("normal");
  s.plane_normal = Vec3(n.at(0).get<double>(), n.at(1).get<double>(),
                        n.at(2).get<double>());
  s.plane_offset = j.at("plane").at("offset").get<double>();
  const auto& noise = j.at("noise");
  s.noise.pixel_sigma = noise.at("pixel_sigma").get<double>();
  s.noise.depth_sigma = noise.at("depth_sigma").get<double>();
  s.noise.outlier_fraction = noise.at("outlier_fraction").get<double>();
  s.noise.descriptor_corruption_sigma =
      noise.at("descriptor_corruption_sigma").get<double>();
  return s;
}

void save_scene(const Scene& s, const std::filesystem::path& path) {
  write_text_file(path, scene_to_json(s));
}

Scene load_scene(const std::filesystem::path& path) {
  return scene_from_json(read_text_file(path));
}

namespace {

struct TensorRef {
  std::string name;
  const double* data;
  std::vector<int> shape;
};

void collect_tensors(const FusionParams& p, std::vector<TensorRef>& refs) {
  auto mat = [&](const std::string& name, const MatX& m) {
    refs.push_back({name, m.data(), {int(m.rows()), int(m.cols())}});
  };
  auto vec = [&](const std::string& name, const VecX& v) {
    refs.push_back({name, v.data(), {int(v.size())}});
  };
  mat("input.w", p.input_w);
  vec("input.b", p.input_b);
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    const auto& blk = p.blocks[b];
    const std::string pre = "block" + std::to_string(b) + ".";
    vec(pre + "ln1.gain", blk.ln1_gain);
    vec(pre + "ln1.bias", blk.ln1_bias);
    vec(pre + "ln2.gain", blk.ln2_gain);
    vec(pre + "ln2.bias", blk.ln2_bias);
    mat(pre + "attn.wq", blk.wq);
    mat(pre + "attn.wk", blk.wk);
    mat(pre + "attn.wv", blk.wv);
    mat(pre + "attn.wo", blk.wo);
    vec(pre + "attn.bq", blk.bq);
    vec(pre + "attn.bk", blk.bk);
    vec(pre + "attn.bv", blk.bv);
    vec(pre + "attn.bo", blk.bo);
    mat(pre + "ff.w1", blk.ff1);
    mat(pre + "ff.w2", blk.ff2);
    vec(pre + "ff.b1", blk.ff1_b);
    vec(pre + "ff.b2", blk.ff2_b);
  }
  mat("head.w1", p.head_w1);
  vec("head.b1", p.head_b1);
  vec("head.w2", p.head_w2);
}

struct TensorMut {
  double* data;
  std::size_t count;
};

TensorMut tensor_slot(FusionParams& p, const std::string& name) {
  auto mat = [](MatX& m) { return TensorMut{m.data(), std::size_t(m.size())}; };
  auto vec = [](VecX& v) { return TensorMut{v.data(), std::size_t(v.size())}; };
  if (name == "input.w") return mat(p.input_w);
  if (name == "input.b") return vec(p.input_b);
  if (name == "head.w1") return mat(p.head_w1);
  if (name == "head.b1") return vec(p.head_b1);
  if (name == "head.w2") return vec(p.head_w2);
  if (name.rfind("block", 0) == 0) {
    const std::size_t dot = name.find('.');
    const std::size_t idx = std::stoul(name.substr(5, dot - 5));
    if (idx >= p.blocks.size()) throw Error("fusion params: bad block index");
    auto& blk = p.blocks[idx];
    const std::string rest = name.substr(dot + 1);
    if (rest == "ln1.gain") return vec(blk.ln1_gain);
    if (rest == "ln1.bias") return vec(blk.ln1_bias);
    if (rest == "ln2.gain") return vec(blk.ln2_gain);
    if (rest == "ln2.bias") return vec(blk.ln2_bias);
    if (rest == "attn.wq") return mat(blk.wq);
    if (rest == "attn.wk") return mat(blk.wk);
    if (rest == "attn.wv") return mat(blk.wv);
    if (rest == "attn.wo") return mat(blk.wo);
    if (rest == "attn.bq") return vec(blk.bq);
    if (rest == "attn.bk") return vec(blk.bk);
    if (rest == "attn.bv") return vec(blk.bv);
    if (rest == "attn.bo") return vec(blk.bo);
    if (rest == "ff.w1") return mat(blk.ff1);
    if (rest == "ff.w2") return mat(blk.ff2);
    if (rest == "ff.b1") return vec(blk.ff1_b);
    if (rest == "ff.b2") return vec(blk.ff2_b);
  }
  throw Error("fusion params: unknown tensor " + name);
}

FusionParams allocate_params(const FusionConfig& cfg) {
  // init_params gives every tensor its final shape; values get overwritten
  return init_params(cfg, 0);
}

}  // namespace

void save_fusion_params(const FusionParams& p,
                        const std::filesystem::path& json_path) {
  std::vector<TensorRef> refs;
  collect_tensors(p, refs);

  std::filesystem::path bin_path = json_path;
  bin_path.replace_extension(".bin");

  json manifest;
  manifest["config"] = {{"blocks", p.config.blocks},
                        {"model_dim", p.config.model_dim},
                        {"heads", p.config.heads},
                        {"input_dim", p.config.input_dim}};
  manifest["head_b2"] = p.head_b2;
  manifest["blob"] = bin_path.filename().string();
  json tensors = json::array();
  std::size_t offset = 0;
  for (const auto& r : refs) {
    std::size_t count = 1;
    for (int d : r.shape) count *= std::size_t(d);
    tensors.push_back({{"name", r.name},
                       {"shape", r.shape},
                       {"offset", offset},
                       {"count", count}});
    offset += count;
  }
  manifest["tensors"] = tensors;
  write_text_file(json_path, manifest.dump(2) + "\n");

  auto out = open_out(bin_path, true);
  for (const auto& r : refs) {
    std::size_t count = 1;
    for (int d : r.shape) count *= std::size_t(d);
    write_doubles(out, r.data, count);
  }
  if (!out) throw Error("write failed: " + bin_path.string());
}

FusionParams load_fusion_params(const std::filesystem::path& json_path) {
  const json manifest = json::parse(read_text_file(json_path));
  FusionConfig cfg;
  cfg.blocks = manifest.at("config").at("blocks").get<int>();
  cfg.model_dim = manifest.at("config").at("model_dim").get<int>();
  cfg.heads = manifest.at("config").at("heads").get<int>();
  cfg.input_dim = manifest.at("config").at("input_dim").get<int>();
  FusionParams p = allocate_params(cfg);
  p.head_b2 = manifest.at("head_b2").get<double>();

  const std::filesystem::path bin_path =
      json_path.parent_path() / manifest.at("blob").get<std::string>();
  auto in = open_in(bin_path, true);
  for (const auto& t : manifest.at("tensors")) {
    const std::string name = t.at("name").get<std::string>();
    const std::size_t count = t.at("count").get<std::size_t>();
    TensorMut slot = tensor_slot(p, name);
    if (slot.count != count)
      throw Error("fusion params: tensor size mismatch for " + name);
    const auto data = read_doubles(in, count);
    std::memcpy(slot.data, data.data(), count * sizeof(double));
  }
  return p;
}

void write_pgm16(const ErrorMap& map, const std::filesystem::path& path) {
  auto out = open_out(path, true);
  out << "P5\n" << map.width << " " << map.height << "\n65535\n";
  std::vector<unsigned char> row(std::size_t(map.width) * 2);
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      const std::size_t idx = std::size_t(y) * map.width + x;
      const double v = map.valid[idx] ? map.values[idx] : 0.0;
      const unsigned int q =
          (unsigned int)std::lround(std::clamp(v, 0.0, 1.0) * 65535.0);
      row[std::size_t(x) * 2] = (unsigned char)(q >> 8);  // big-endian per PGM
      row[std::size_t(x) * 2 + 1] = (unsigned char)(q & 0xff);
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              std::streamsize(row.size()));
  }
  if (!out) throw Error("write failed: " + path.string());
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
  auto out = open_out(path, true);  // binary keeps newlines verbatim
  out.write(text.data(), std::streamsize(text.size()));
  if (!out) throw Error("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  auto in = open_in(path, true);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return text;
}

}  // namespace gcr::io
