#include "frn/checkpoint.hpp"

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

namespace frn {

namespace {

constexpr std::uint64_t kMagic = 0x46524e434b505431ULL;  // "FRNCKPT1"
constexpr std::uint32_t kVersion = 1;

struct Writer {
  std::ofstream out;
  explicit Writer(const std::string& path) : out(path, std::ios::binary) {
    if (!out) throw CheckpointError("cannot open checkpoint for writing: " + path);
  }
  void u32(std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }
  void u64(std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); }
  void str(const std::string& s) {
    u64(s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void mat(const Eigen::Matrix<real, Eigen::Dynamic, Eigen::Dynamic>& m) {
    u32(static_cast<std::uint32_t>(m.rows()));
    u32(static_cast<std::uint32_t>(m.cols()));
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(sizeof(real) * m.size()));
  }
};

struct Reader {
  std::ifstream in;
  explicit Reader(const std::string& path) : in(path, std::ios::binary) {
    if (!in) throw CheckpointError("cannot open checkpoint: " + path);
  }
  std::uint32_t u32() {
    std::uint32_t v;
    in.read(reinterpret_cast<char*>(&v), 4);
    check();
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    in.read(reinterpret_cast<char*>(&v), 8);
    check();
    return v;
  }
  std::string str() {
    const std::uint64_t n = u64();
    std::string s(n, '\0');
    in.read(s.data(), static_cast<std::streamsize>(n));
    check();
    return s;
  }
  void mat(Eigen::Matrix<real, Eigen::Dynamic, Eigen::Dynamic>& m) {
    const std::uint32_t rows = u32(), cols = u32();
    if (m.rows() != rows || m.cols() != cols)
      throw CheckpointError("checkpoint parameter shape mismatch");
    in.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(sizeof(real) * m.size()));
    check();
  }
  void check() {
    if (!in) throw CheckpointError("truncated checkpoint");
  }
};

void write_params(Writer& w, const ParamList<real>& ps) {
  w.u32(static_cast<std::uint32_t>(ps.size()));
  for (auto* p : ps) w.mat(p->v);
}

void read_params(Reader& r, const ParamList<real>& ps) {
  if (r.u32() != ps.size()) throw CheckpointError("checkpoint parameter count mismatch");
  for (auto* p : ps) r.mat(p->v);
}

void write_adam(Writer& w, const Adam<real>& a) {
  w.u64(static_cast<std::uint64_t>(a.t));
  w.u32(static_cast<std::uint32_t>(a.m.size()));
  for (size_t i = 0; i < a.m.size(); ++i) {
    w.mat(a.m[i]);
    w.mat(a.v[i]);
  }
}

void read_adam(Reader& r, Adam<real>& a) {
  a.t = static_cast<long>(r.u64());
  if (r.u32() != a.m.size()) throw CheckpointError("checkpoint optimizer state mismatch");
  for (size_t i = 0; i < a.m.size(); ++i) {
    r.mat(a.m[i]);
    r.mat(a.v[i]);
  }
}

}  // namespace

void checkpoint_save(const std::string& path, const TrainConfig& cfg, long step,
                     Generator<real>& g, MultiScaleDiscriminator<real>& d, Adam<real>& adam_g,
                     Adam<real>& adam_d) {
  const std::string tmp = path + ".tmp";
  {
    Writer w(tmp);
    w.u64(kMagic);
    w.u32(kVersion);
    w.u64(config_arch_hash(cfg));
    w.str(config_to_json(cfg).dump());
    w.u64(static_cast<std::uint64_t>(step));

    ParamList<real> gp, dp;
    g.collect(gp);
    d.collect(dp);
    write_params(w, gp);
    write_params(w, dp);
    write_adam(w, adam_g);
    write_adam(w, adam_d);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw CheckpointError("cannot move checkpoint into place: " + path);
}

CheckpointHeader checkpoint_header(const std::string& path) {
  Reader r(path);
  if (r.u64() != kMagic) throw CheckpointError("not a checkpoint file: " + path);
  CheckpointHeader h;
  h.version = r.u32();
  if (h.version != kVersion)
    throw CheckpointError("unsupported checkpoint format version " + std::to_string(h.version));
  h.arch_hash = r.u64();
  h.cfg = config_from_json(nlohmann::json::parse(r.str()));
  h.step = static_cast<long>(r.u64());
  return h;
}

long checkpoint_load(const std::string& path, const TrainConfig& expect_cfg, Generator<real>& g,
                     MultiScaleDiscriminator<real>& d, Adam<real>* adam_g, Adam<real>* adam_d) {
  Reader r(path);
  if (r.u64() != kMagic) throw CheckpointError("not a checkpoint file: " + path);
  const std::uint32_t version = r.u32();
  if (version != kVersion)
    throw CheckpointError("unsupported checkpoint format version " + std::to_string(version));
  const std::uint64_t hash = r.u64();
  if (hash != config_arch_hash(expect_cfg))
    throw CheckpointError("checkpoint architecture hash mismatch (model/code version differs)");
  (void)r.str();  // config echo, already validated via the hash
  const long step = static_cast<long>(r.u64());

  ParamList<real> gp, dp;
  g.collect(gp);
  d.collect(dp);
  read_params(r, gp);
  read_params(r, dp);
  if (adam_g) read_adam(r, *adam_g);
  if (adam_d && adam_g) read_adam(r, *adam_d);
  return step;
}

void save_param_blob(const std::string& path, const ParamList<real>& ps) {
  Writer w(path);
  w.u64(kMagic);
  w.u32(kVersion);
  write_params(w, ps);
}

void load_param_blob(const std::string& path, const ParamList<real>& ps) {
  Reader r(path);
  if (r.u64() != kMagic) throw CheckpointError("not a parameter blob: " + path);
  if (r.u32() != kVersion) throw CheckpointError("unsupported blob version in " + path);
  read_params(r, ps);
}

}  // namespace frn
