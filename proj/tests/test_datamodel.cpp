#include <doctest.h>

#include <cstring>
#include <functional>
#include <limits>
#include <random>

#include "helpers.hpp"
#include "knockoff/datamodel.hpp"
#include "knockoff/errors.hpp"

using namespace knockoff;
using testing::TempDir;
using testing::write_text;

namespace {

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("csv parses header ids and values") {
  TempDir dir;
  write_text(dir / "m.csv", "latent_0,latent_1\n1.0,0.0\n-3.0,2.0");
  const auto m = load_matrix(dir / "m.csv", MatrixFormat::csv);
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 2);
  CHECK(m.column_ids() == std::vector<LatentId>{0, 1});
  CHECK(m.values()(1, 0) == -3.0);
  CHECK(m.values()(1, 1) == 2.0);
}

TEST_CASE("csv keeps arbitrary latent ids and tolerates CRLF") {
  TempDir dir;
  write_text(dir / "m.csv", "latent_17,latent_4\r\n0.5,1.5\r\n");
  const auto m = load_matrix(dir / "m.csv", MatrixFormat::csv);
  CHECK(m.column_ids() == std::vector<LatentId>{17, 4});
  CHECK(m.values()(0, 1) == 1.5);
}

TEST_CASE("csv errors") {
  TempDir dir;
  write_text(dir / "empty.csv", "");
  CHECK_THROWS_AS(load_matrix(dir / "empty.csv", MatrixFormat::csv), DataError);
  CHECK(error_of([&] { load_matrix(dir / "empty.csv", MatrixFormat::csv); }).find("no rows") != std::string::npos);

  write_text(dir / "header_only.csv", "latent_0\n");
  CHECK(error_of([&] { load_matrix(dir / "header_only.csv", MatrixFormat::csv); }).find("no rows") !=
        std::string::npos);

  write_text(dir / "nan.csv", "latent_0,latent_1\nnan,1\n");
  const auto msg = error_of([&] { load_matrix(dir / "nan.csv", MatrixFormat::csv); });
  CHECK(msg.find("(row 1, col 0)") != std::string::npos);

  write_text(dir / "ragged.csv", "latent_0,latent_1\n1,2\n3\n");
  CHECK_THROWS_AS(load_matrix(dir / "ragged.csv", MatrixFormat::csv), DataError);

  write_text(dir / "header.csv", "a,b\n1,2\n");
  CHECK_THROWS_AS(load_matrix(dir / "header.csv", MatrixFormat::csv), DataError);

  write_text(dir / "dup.csv", "latent_3,latent_3\n1,2\n");
  CHECK_THROWS_AS(load_matrix(dir / "dup.csv", MatrixFormat::csv), DataError);

  write_text(dir / "text.csv", "latent_0\nabc\n");
  CHECK(error_of([&] { load_matrix(dir / "text.csv", MatrixFormat::csv); }).find("(row 1, col 0)") !=
        std::string::npos);

  CHECK_THROWS_AS(load_matrix(dir / "missing.csv", MatrixFormat::csv), DataError);
}

TEST_CASE("labels") {
  TempDir dir;
  write_text(dir / "y.txt", "0\n1\n1\n");
  CHECK(load_labels(dir / "y.txt").values() == std::vector<int>{0, 1, 1});

  write_text(dir / "bad.txt", "2\n");
  CHECK(error_of([&] { load_labels(dir / "bad.txt"); }).find("label out of range") != std::string::npos);

  write_text(dir / "empty.txt", "");
  CHECK(load_labels(dir / "empty.txt").empty());

  CHECK_THROWS_AS(LabelVector({0, 1, -1}), DataError);
  CHECK(LabelVector({0, 1}).has_both_classes());
  CHECK_FALSE(LabelVector({1, 1}).has_both_classes());

  const FeatureMatrix m(Eigen::MatrixXd::Ones(3, 1));
  CHECK_NOTHROW(check_aligned(m, LabelVector({0, 1, 0})));
  CHECK_THROWS_AS(check_aligned(m, LabelVector({0, 1})), DataError);
}

TEST_CASE("matrix invariants") {
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 2);
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(FeatureMatrix{bad}, DataError);
  CHECK_THROWS_AS(FeatureMatrix(Eigen::MatrixXd::Zero(0, 2)), DataError);
  CHECK_THROWS_AS(FeatureMatrix(Eigen::MatrixXd::Zero(2, 2), {0, 0}), DataError);
  CHECK_THROWS_AS(FeatureMatrix(Eigen::MatrixXd::Zero(2, 2), {0, -1}), DataError);
  CHECK_THROWS_AS(FeatureMatrix(Eigen::MatrixXd::Zero(2, 2), {0}), DataError);
}

TEST_CASE("round trips in both formats") {
  TempDir dir;
  for (auto format : {MatrixFormat::csv, MatrixFormat::raw_f32}) {
    const auto path = dir / (std::string("id.") + std::string(to_string(format)));
    const FeatureMatrix eye(Eigen::MatrixXd::Identity(2, 2));
    save_matrix(eye, path, format);
    const auto back = load_matrix(path, format);
    CHECK(back.values() == eye.values());
    CHECK(back.column_ids() == eye.column_ids());
  }

  const FeatureMatrix tiny(Eigen::MatrixXd::Constant(1, 1, 0.1));
  save_matrix(tiny, dir / "tiny.csv", MatrixFormat::csv);
  CHECK(std::abs(load_matrix(dir / "tiny.csv", MatrixFormat::csv).values()(0, 0) - 0.1) <= 1e-9);
}

TEST_CASE("raw-f32 layout") {
  TempDir dir;
  Eigen::MatrixXd v(2, 3);
  v << 1, 2, 3, 4, 5, 6;
  save_matrix(FeatureMatrix(v, {10, 20, 30}), dir / "m.bin", MatrixFormat::raw_f32);
  const auto bytes = testing::read_text(dir / "m.bin");
  REQUIRE(bytes.size() == 16 + 6 * 4);
  CHECK(bytes.substr(0, 4) == "KNF1");
  std::uint32_t n = 0, p = 0;
  std::memcpy(&n, bytes.data() + 4, 4);
  std::memcpy(&p, bytes.data() + 8, 4);
  CHECK(n == 2);
  CHECK(p == 3);
  float second = 0;
  std::memcpy(&second, bytes.data() + 16 + 4, 4);
  CHECK(second == 2.0f);  // row-major
  CHECK(testing::read_text(column_ids_path(dir / "m.bin")) == "10\n20\n30\n");

  // without the sidecar, ids default to positions
  std::filesystem::remove(column_ids_path(dir / "m.bin"));
  CHECK(load_matrix(dir / "m.bin", MatrixFormat::raw_f32).column_ids() == std::vector<LatentId>{0, 1, 2});

  // declared dims must match the payload
  write_text(dir / "short.bin", bytes.substr(0, bytes.size() - 4));
  CHECK_THROWS_AS(load_matrix(dir / "short.bin", MatrixFormat::raw_f32), DataError);
  write_text(dir / "magic.bin", "XXXX" + bytes.substr(4));
  CHECK_THROWS_AS(load_matrix(dir / "magic.bin", MatrixFormat::raw_f32), DataError);
}

TEST_CASE("property: save then load is the identity") {
  TempDir dir;
  std::mt19937_64 gen(7);
  std::uniform_int_distribution<int> dim(1, 12);
  std::normal_distribution<double> normal(0.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = dim(gen), p = dim(gen);
    Eigen::MatrixXd v(n, p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < p; ++j) v(i, j) = trial % 3 == 0 ? std::abs(normal(gen)) : normal(gen);
    std::vector<LatentId> ids(static_cast<std::size_t>(p));
    for (int j = 0; j < p; ++j) ids[static_cast<std::size_t>(j)] = 1000 - 7 * j;

    const FeatureMatrix m(v, ids);
    save_matrix(m, dir / "p.csv", MatrixFormat::csv);
    const auto csv = load_matrix(dir / "p.csv", MatrixFormat::csv);
    CHECK(csv.values() == m.values());  // shortest round-trip text is exact
    CHECK(csv.column_ids() == ids);

    // raw-f32 stores floats: exact for float-representable values
    const FeatureMatrix mf(v.cast<float>().cast<double>(), ids);
    save_matrix(mf, dir / "p.bin", MatrixFormat::raw_f32);
    const auto raw = load_matrix(dir / "p.bin", MatrixFormat::raw_f32);
    CHECK(raw.values() == mf.values());
    CHECK(raw.column_ids() == ids);
    CHECK(raw.rows() == n);
    CHECK(raw.cols() == p);
  }
}

TEST_CASE("labels round trip and format names") {
  TempDir dir;
  const LabelVector y({1, 0, 0, 1, 1});
  save_labels(y, dir / "y.txt");
  CHECK(load_labels(dir / "y.txt").values() == y.values());
  CHECK(parse_matrix_format("csv") == MatrixFormat::csv);
  CHECK(parse_matrix_format("raw-f32") == MatrixFormat::raw_f32);
  CHECK_THROWS_AS(parse_matrix_format("parquet"), ConfigError);
}
