#include "feoc/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "feoc/errors.hpp"

namespace feoc {

namespace {

constexpr char kDatasetMagic[8] = {'F', 'E', 'O', 'C', 'D', 'S', 'E', 'T'};
constexpr char kCheckpointMagic[8] = {'F', 'E', 'O', 'C', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kPayloadBasis = 0;
constexpr std::uint32_t kPayloadOperator = 1;

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

class Writer {
 public:
  void bytes(const void* p, std::size_t n) { buf_.append(static_cast<const char*>(p), n); }
  void u32(std::uint32_t v) { bytes(&v, sizeof v); }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void f64(double v) { bytes(&v, sizeof v); }
  void f64s(const double* p, std::size_t n) { bytes(p, n * sizeof(double)); }
  std::size_t size() const { return buf_.size(); }
  std::string& str() { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}
  void bytes(void* p, std::size_t n) {
    if (n > data_.size() - pos_) throw TruncatedFile("file ends before expected data");
    std::memcpy(p, data_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    bytes(&v, sizeof v);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    bytes(&v, sizeof v);
    return v;
  }
  double f64() {
    double v;
    bytes(&v, sizeof v);
    return v;
  }
  void f64s(double* p, std::size_t n) {
    if (n > (data_.size() - pos_) / sizeof(double)) throw TruncatedFile("file ends inside an array");
    bytes(p, n * sizeof(double));
  }
  /// Throws TruncatedFile unless `n` more bytes are available.
  void need(std::uint64_t n) const {
    if (n > data_.size() - pos_) throw TruncatedFile("file shorter than its header declares");
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

void check_magic(Reader& r, const char (&magic)[8], const char* what) {
  char got[8];
  r.bytes(got, 8);
  if (std::memcmp(got, magic, 8) != 0) {
    throw FormatVersionMismatch(std::string("not a ") + what + " file (bad magic)");
  }
  const std::uint32_t version = r.u32();
  if (version != kFormatVersion) {
    throw FormatVersionMismatch(std::string(what) + " format version " + std::to_string(version) +
                                ", expected " + std::to_string(kFormatVersion));
  }
}

void finish(Writer& w) { w.u64(fnv1a64(w.str())); }

/// Verifies the trailing checksum over everything before it.
void verify_trailer(std::string_view bytes, std::size_t body_end) {
  if (bytes.size() < body_end + 8) throw TruncatedFile("missing checksum trailer");
  if (bytes.size() > body_end + 8) {
    throw FormatVersionMismatch("unexpected trailing bytes after checksum");
  }
  std::uint64_t stored;
  std::memcpy(&stored, bytes.data() + body_end, 8);
  if (stored != fnv1a64(bytes.substr(0, body_end))) throw ChecksumFailure("checksum mismatch");
}

ProblemKind read_problem(Reader& r) {
  const std::uint32_t k = r.u32();
  if (k > 2) throw FormatVersionMismatch("unknown problem id " + std::to_string(k));
  return static_cast<ProblemKind>(k);
}

void write_task(Writer& w, const TaskSpec& t) {
  w.u32(static_cast<std::uint32_t>(t.kind));
  w.u32(static_cast<std::uint32_t>(t.target.size()));
  w.f64s(t.target.data(), static_cast<std::size_t>(t.target.size()));
  w.u32(static_cast<std::uint32_t>(t.obstacles.size()));
  for (const auto& ob : t.obstacles) {
    w.f64(ob.amplitude);
    w.f64(ob.center(0));
    w.f64(ob.center(1));
    w.f64(ob.sigma);
  }
  w.f64(t.terminal_weight);
}

TaskSpec read_task(Reader& r) {
  TaskSpec t;
  const std::uint32_t kind = r.u32();
  if (kind > 2) throw FormatVersionMismatch("unknown task kind " + std::to_string(kind));
  t.kind = static_cast<TaskKind>(kind);
  const std::uint32_t len = r.u32();
  r.need(static_cast<std::uint64_t>(len) * 8);
  t.target.resize(len);
  r.f64s(t.target.data(), len);
  const std::uint32_t n_obst = r.u32();
  r.need(static_cast<std::uint64_t>(n_obst) * 32);
  for (std::uint32_t i = 0; i < n_obst; ++i) {
    Obstacle ob;
    ob.amplitude = r.f64();
    ob.center(0) = r.f64();
    ob.center(1) = r.f64();
    ob.sigma = r.f64();
    t.obstacles.push_back(ob);
  }
  t.terminal_weight = r.f64();
  return t;
}

void write_mlp_arch(Writer& w, const MlpParams& p) {
  const std::vector<int> widths = p.widths();
  w.u32(static_cast<std::uint32_t>(widths.size()));
  for (int x : widths) w.u32(static_cast<std::uint32_t>(x));
  w.u32(static_cast<std::uint32_t>(p.activation));
  w.u32(static_cast<std::uint32_t>(p.head_count));
  w.u32(static_cast<std::uint32_t>(p.head_dim));
}

MlpParams read_mlp_arch(Reader& r) {
  const std::uint32_t n = r.u32();
  if (n < 2 || n > 64) throw FormatVersionMismatch("implausible layer count");
  std::vector<int> widths(n);
  for (auto& x : widths) {
    x = static_cast<int>(r.u32());
    if (x < 1 || x > (1 << 20)) throw FormatVersionMismatch("implausible layer width");
  }
  const std::uint32_t act = r.u32();
  if (act > 2) throw FormatVersionMismatch("unknown activation id");
  MlpParams p;
  p.activation = static_cast<Activation>(act);
  p.head_count = static_cast<int>(r.u32());
  p.head_dim = static_cast<int>(r.u32());
  if (static_cast<long long>(p.head_count) * p.head_dim != widths.back()) {
    throw FormatVersionMismatch("head shape does not match output width");
  }
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    Layer l;
    l.weight = DenseMatrix::Zero(widths[i], widths[i + 1]);
    l.bias = Vector::Zero(widths[i + 1]);
    p.layers.push_back(std::move(l));
  }
  return p;
}

void write_vec(Writer& w, const Vector& v) { w.f64s(v.data(), static_cast<std::size_t>(v.size())); }

Vector read_vec(Reader& r, std::uint32_t n) {
  Vector v(n);
  r.f64s(v.data(), n);
  return v;
}

struct ModelSection {
  std::uint32_t payload = kPayloadBasis;
  ProblemKind problem = ProblemKind::PointMass2D;
  MlpParams params;
  Vector shift;
  Vector scale;
  double lambda_tik = 0.0;
  std::uint64_t bound_checksum = 0;
  EtaBox box;
};

/// Architecture + parameter bytes; the model checksum covers exactly these.
std::string model_bytes(const ModelSection& s) {
  Writer w;
  w.u32(static_cast<std::uint32_t>(s.problem));
  write_mlp_arch(w, s.params);
  w.u32(static_cast<std::uint32_t>(s.shift.size()));
  write_vec(w, s.shift);
  write_vec(w, s.scale);
  w.f64(s.lambda_tik);
  w.u64(s.bound_checksum);
  w.u32(static_cast<std::uint32_t>(s.box.lo.size()));
  write_vec(w, s.box.lo);
  write_vec(w, s.box.hi);
  const Vector flat = s.params.flatten();
  w.u64(static_cast<std::uint64_t>(flat.size()));
  write_vec(w, flat);
  return std::move(w.str());
}

std::string encode_checkpoint(const ModelSection& s, const Provenance& prov) {
  Writer w;
  w.bytes(kCheckpointMagic, 8);
  w.u32(kFormatVersion);
  w.u32(s.payload);
  const std::string model = model_bytes(s);
  w.bytes(model.data(), model.size());
  w.u64(prov.config_hash);
  w.u64(prov.seed);
  w.u64(prov.steps);
  w.u64(fnv1a64(model));
  finish(w);
  return std::move(w.str());
}

std::pair<ModelSection, Provenance> decode_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  check_magic(r, kCheckpointMagic, "checkpoint");
  ModelSection s;
  s.payload = r.u32();
  if (s.payload != kPayloadBasis && s.payload != kPayloadOperator) {
    throw FormatVersionMismatch("unknown checkpoint payload kind");
  }
  const std::size_t model_begin = r.pos();
  s.problem = read_problem(r);
  s.params = read_mlp_arch(r);
  const std::uint32_t k = r.u32();
  s.shift = read_vec(r, k);
  s.scale = read_vec(r, k);
  s.lambda_tik = r.f64();
  s.bound_checksum = r.u64();
  const std::uint32_t eta = r.u32();
  s.box.lo = read_vec(r, eta);
  s.box.hi = read_vec(r, eta);
  const std::uint64_t count = r.u64();
  if (count != s.params.parameter_count()) {
    throw FormatVersionMismatch("parameter count does not match architecture");
  }
  r.need(count * 8);
  Vector flat(static_cast<Eigen::Index>(count));
  r.f64s(flat.data(), count);
  const std::size_t model_end = r.pos();
  Provenance prov;
  prov.config_hash = r.u64();
  prov.seed = r.u64();
  prov.steps = r.u64();
  const std::uint64_t model_sum = r.u64();
  verify_trailer(bytes, r.pos());
  if (model_sum != fnv1a64(bytes.substr(model_begin, model_end - model_begin))) {
    throw ChecksumFailure("model checksum mismatch");
  }
  s.params.assign(flat);
  return {std::move(s), prov};
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string encode_dataset(const TaskDataset& d) {
  validate_dataset(d);
  if (d.trajectory_offsets.size() != d.trajectory_objectives.size()) {
    throw ShapeMismatch("dataset trajectory index is inconsistent");
  }
  Writer w;
  w.bytes(kDatasetMagic, 8);
  w.u32(kFormatVersion);
  w.u32(static_cast<std::uint32_t>(d.problem));
  write_task(w, d.task);
  const auto n = static_cast<std::uint32_t>(d.state_dim());
  const auto m = static_cast<std::uint32_t>(d.control_dim());
  w.u64(static_cast<std::uint64_t>(d.size()));
  w.u32(n);
  w.u32(m);
  w.f64(d.horizon);
  w.u32(static_cast<std::uint32_t>(d.n_steps));
  w.u64(d.seed);
  w.u64(d.trajectory_offsets.size());
  for (std::size_t i = 0; i < d.trajectory_offsets.size(); ++i) {
    w.u64(d.trajectory_offsets[i]);
    w.f64(d.trajectory_objectives[i]);
  }
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    w.f64s(d.states.row(i).data(), n);
    w.f64(d.times(i));
    w.f64s(d.controls.row(i).data(), m);
  }
  finish(w);
  return std::move(w.str());
}

TaskDataset decode_dataset(std::string_view bytes) {
  Reader r(bytes);
  check_magic(r, kDatasetMagic, "dataset");
  TaskDataset d;
  d.problem = read_problem(r);
  d.task = read_task(r);
  const std::uint64_t count = r.u64();
  const std::uint32_t n = r.u32();
  const std::uint32_t m = r.u32();
  d.horizon = r.f64();
  d.n_steps = static_cast<int>(r.u32());
  d.seed = r.u64();
  const std::uint64_t n_traj = r.u64();
  r.need(n_traj * 16);
  for (std::uint64_t i = 0; i < n_traj; ++i) {
    d.trajectory_offsets.push_back(r.u64());
    d.trajectory_objectives.push_back(r.f64());
  }
  const ControlProblem problem = make_problem(d.problem, d.n_steps > 0 ? d.n_steps : 0);
  if (n != static_cast<std::uint32_t>(problem.state_dim) ||
      m != static_cast<std::uint32_t>(problem.control_dim) || d.horizon != problem.horizon ||
      d.n_steps < 1 || d.task.target.size() != static_cast<Eigen::Index>(n)) {
    throw FormatVersionMismatch("dataset header dimensions (n=" + std::to_string(n) +
                                ", m=" + std::to_string(m) + ") do not match " +
                                problem.name());
  }
  const std::uint64_t record = (static_cast<std::uint64_t>(n) + 1 + m) * 8;
  if (count == 0 || count > r.remaining() / record) {
    if (count == 0) throw FormatVersionMismatch("dataset declares zero samples");
    throw TruncatedFile("dataset declares " + std::to_string(count) + " samples");
  }
  d.states.resize(static_cast<Eigen::Index>(count), n);
  d.controls.resize(static_cast<Eigen::Index>(count), m);
  d.times.resize(static_cast<Eigen::Index>(count));
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(count); ++i) {
    r.f64s(d.states.row(i).data(), n);
    d.times(i) = r.f64();
    r.f64s(d.controls.row(i).data(), m);
  }
  verify_trailer(bytes, r.pos());
  for (auto off : d.trajectory_offsets) {
    if (off >= count) throw FormatVersionMismatch("trajectory offset out of range");
  }
  return d;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void save_dataset(const TaskDataset& dataset, const std::filesystem::path& path) {
  write_file(path, encode_dataset(dataset));
}

TaskDataset load_dataset(const std::filesystem::path& path) {
  return decode_dataset(read_file(path));
}

namespace {

ModelSection basis_section(const BasisSet& basis) {
  ModelSection s;
  s.payload = kPayloadBasis;
  s.problem = basis.problem;
  s.params = basis.params;
  s.shift = basis.input_shift;
  s.scale = basis.input_scale;
  s.lambda_tik = basis.lambda_tik;
  return s;
}

ModelSection operator_section(const OperatorNet& net) {
  ModelSection s;
  s.payload = kPayloadOperator;
  s.problem = net.problem;
  s.params = net.params;
  s.shift = net.output_shift;
  s.scale = net.output_scale;
  s.bound_checksum = net.basis_checksum;
  s.box = net.box;
  return s;
}

}  // namespace

std::uint64_t basis_checksum(const BasisSet& basis) {
  return fnv1a64(model_bytes(basis_section(basis)));
}

std::string encode_basis(const BasisSet& basis, const Provenance& prov) {
  return encode_checkpoint(basis_section(basis), prov);
}

std::string encode_operator(const OperatorNet& net, const Provenance& prov) {
  return encode_checkpoint(operator_section(net), prov);
}

void save_basis(const BasisSet& basis, const Provenance& prov, const std::filesystem::path& path) {
  write_file(path, encode_basis(basis, prov));
}

void save_operator(const OperatorNet& net, const Provenance& prov,
                   const std::filesystem::path& path) {
  write_file(path, encode_operator(net, prov));
}

BasisCheckpoint load_basis(const std::filesystem::path& path) {
  auto [s, prov] = decode_checkpoint(read_file(path));
  if (s.payload != kPayloadBasis) throw FormatVersionMismatch(path.string() + " is not a basis");
  if (s.shift.size() != s.params.input_dim()) {
    throw FormatVersionMismatch("basis normalization length does not match input width");
  }
  BasisCheckpoint out;
  out.basis.params = std::move(s.params);
  out.basis.problem = s.problem;
  out.basis.input_shift = std::move(s.shift);
  out.basis.input_scale = std::move(s.scale);
  out.basis.lambda_tik = s.lambda_tik;
  out.provenance = prov;
  return out;
}

OperatorCheckpoint load_operator(const std::filesystem::path& path) {
  auto [s, prov] = decode_checkpoint(read_file(path));
  if (s.payload != kPayloadOperator) {
    throw FormatVersionMismatch(path.string() + " is not an operator network");
  }
  if (s.shift.size() != s.params.output_dim() || s.box.lo.size() != s.params.input_dim()) {
    throw FormatVersionMismatch("operator affine/box sizes do not match the network");
  }
  OperatorCheckpoint out;
  out.net.params = std::move(s.params);
  out.net.problem = s.problem;
  out.net.output_shift = std::move(s.shift);
  out.net.output_scale = std::move(s.scale);
  out.net.basis_checksum = s.bound_checksum;
  out.net.box = std::move(s.box);
  out.provenance = prov;
  return out;
}

}  // namespace feoc
