#include <doctest.h>

#include <cstring>
#include <filesystem>

#include "feoc/errors.hpp"
#include "feoc/io.hpp"
#include "fixtures.hpp"

using namespace feoc;

namespace {

TaskDataset sample_dataset() {
  TaskDataset d = fixtures::random_inputs(ProblemKind::PointMass2D, 20, 17);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  for (Eigen::Index i = 0; i < d.controls.size(); ++i) d.controls.data()[i] = n01(rng);
  d.trajectory_offsets = {0, 10};
  d.trajectory_objectives = {12.5, 13.25};
  d.seed = 99;
  return d;
}

OperatorNet sample_operator(const BasisSet& b) {
  OperatorNet net;
  net.params = mlp_init(std::vector<int>{2, 8}, Activation::Tanh, 4, 1, 5);
  net.problem = ProblemKind::PointMass2D;
  net.box = EtaBox{Vector::Constant(2, 1.0), Vector::Constant(2, 2.0)};
  net.output_shift = Vector::LinSpaced(4, -1, 1);
  net.output_scale = Vector::Constant(4, 0.5);
  net.basis_checksum = basis_checksum(b);
  return net;
}

void put_u32(std::string& s, std::size_t at, std::uint32_t v) { std::memcpy(s.data() + at, &v, 4); }

void reseal(std::string& s) {
  const std::uint64_t h = fnv1a64(std::string_view(s).substr(0, s.size() - 8));
  std::memcpy(s.data() + s.size() - 8, &h, 8);
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "feoc_io_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("dataset round trip is bitwise") {
  const TaskDataset d = sample_dataset();
  const auto path = scratch("rt.fedata");
  save_dataset(d, path);
  const TaskDataset e = load_dataset(path);
  CHECK(e.size() == 20);
  CHECK(std::memcmp(e.states.data(), d.states.data(), sizeof(double) * d.states.size()) == 0);
  CHECK(std::memcmp(e.controls.data(), d.controls.data(), sizeof(double) * d.controls.size()) == 0);
  CHECK(std::memcmp(e.times.data(), d.times.data(), sizeof(double) * d.times.size()) == 0);
  CHECK(e.task.target == d.task.target);
  CHECK(e.trajectory_offsets == d.trajectory_offsets);
  CHECK(e.trajectory_objectives == d.trajectory_objectives);
  CHECK(e.seed == 99);
  CHECK(encode_dataset(e) == read_file(path));
}

TEST_CASE("obstacle datasets round trip") {
  TaskDataset d = fixtures::random_inputs(ProblemKind::Bicycle4D, 7, 2);
  d.task = obstacle_task(bicycle_4d(), {Obstacle{40, {1, 2}, 0.5}, Obstacle{25, {3, 1}, 0.3}});
  const TaskDataset e = decode_dataset(encode_dataset(d));
  REQUIRE(e.task.obstacles.size() == 2);
  CHECK(e.task.obstacles[1].amplitude == 25);
  CHECK(e.task.obstacles[0].sigma == 0.5);
  CHECK(encode_dataset(e) == encode_dataset(d));
}

TEST_CASE("damaged datasets fail closed") {
  const std::string good = encode_dataset(sample_dataset());
  SUBCASE("truncated inside the records") {
    CHECK_THROWS_AS(decode_dataset(good.substr(0, good.size() / 2)), TruncatedFile);
  }
  SUBCASE("truncated checksum") {
    CHECK_THROWS_AS(decode_dataset(good.substr(0, good.size() - 4)), TruncatedFile);
  }
  SUBCASE("truncated header") {
    CHECK_THROWS_AS(decode_dataset(good.substr(0, 10)), TruncatedFile);
  }
  SUBCASE("flipped payload byte") {
    std::string bad = good;
    bad[bad.size() - 20] ^= 0x01;
    CHECK_THROWS_AS(decode_dataset(bad), ChecksumFailure);
  }
  SUBCASE("bad magic") {
    std::string bad = good;
    bad[0] = 'X';
    CHECK_THROWS_AS(decode_dataset(bad), FormatVersionMismatch);
  }
  SUBCASE("unknown version") {
    std::string bad = good;
    put_u32(bad, 8, 7);
    reseal(bad);
    CHECK_THROWS_AS(decode_dataset(bad), FormatVersionMismatch);
  }
  SUBCASE("state dimension inconsistent with the problem") {
    std::string bad = good;
    put_u32(bad, 60, 3);
    reseal(bad);
    CHECK_THROWS_AS(decode_dataset(bad), FormatVersionMismatch);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_dataset(scratch("does_not_exist.fedata")), IoError);
  }
}

TEST_CASE("basis checkpoint save, load, save is byte-identical") {
  BasisSet b = fixtures::random_basis(ProblemKind::Quadcopter12D, 6, {16, 16}, 8);
  b.input_shift.setLinSpaced(-0.5, 0.5);
  b.input_scale.setConstant(1.5);
  b.lambda_tik = 2e-3;
  const Provenance prov{0xabcdef, 42, 1000};
  const auto path = scratch("basis.feckpt");
  save_basis(b, prov, path);
  const BasisCheckpoint ck = load_basis(path);
  CHECK(ck.provenance.config_hash == 0xabcdef);
  CHECK(ck.provenance.seed == 42);
  CHECK(ck.provenance.steps == 1000);
  CHECK(ck.basis.params.flatten() == b.params.flatten());
  CHECK(ck.basis.params.widths() == b.params.widths());
  CHECK(basis_checksum(ck.basis) == basis_checksum(b));
  CHECK(encode_basis(ck.basis, ck.provenance) == read_file(path));

  SUBCASE("any parameter change alters the checksum") {
    BasisSet c = b;
    Vector flat = c.params.flatten();
    flat(3) = std::nextafter(flat(3), 1.0);
    c.params.assign(flat);
    CHECK(basis_checksum(c) != basis_checksum(b));
  }
  SUBCASE("corrupted checkpoint is rejected") {
    std::string bytes = read_file(path);
    bytes[bytes.size() / 2] ^= 0x10;
    write_file(path, bytes);
    CHECK_THROWS_AS(load_basis(path), ChecksumFailure);
  }
  SUBCASE("operator file is not a basis") {
    const auto op_path = scratch("not_basis.feckpt");
    save_operator(sample_operator(b), prov, op_path);
    CHECK_THROWS_AS(load_basis(op_path), FormatVersionMismatch);
  }
}

TEST_CASE("operator checkpoint round trip keeps the bound basis") {
  const BasisSet b = fixtures::random_basis(ProblemKind::PointMass2D, 4, {8}, 1);
  const OperatorNet net = sample_operator(b);
  const auto path = scratch("op.feckpt");
  save_operator(net, Provenance{1, 2, 3}, path);
  const OperatorCheckpoint ck = load_operator(path);
  CHECK(ck.net.basis_checksum == basis_checksum(b));
  CHECK(ck.net.box.lo == net.box.lo);
  CHECK(ck.net.box.hi == net.box.hi);
  CHECK(ck.net.output_shift == net.output_shift);
  CHECK(ck.net.output_scale == net.output_scale);
  const Vector eta = Vector::Constant(2, 1.3);
  CHECK(ck.net.apply(eta) == net.apply(eta));
  CHECK(encode_operator(ck.net, ck.provenance) == read_file(path));
}

TEST_CASE("write_file replaces atomically") {
  const auto path = scratch("blob.bin");
  write_file(path, "first");
  write_file(path, "second");
  CHECK(read_file(path) == "second");
}

}  // TEST_SUITE
