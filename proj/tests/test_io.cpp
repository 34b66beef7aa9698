#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "doctest.h"
#include "gsturm/forward.hpp"
#include "gsturm/io.hpp"
#include "test_helpers.hpp"

using namespace gsturm;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::kIo;
}

}  // namespace

TEST_CASE("matrices survive a text round trip bit for bit") {
  std::mt19937 rng(11);
  const CMatrix a = testing::random_hermitian(4, rng) * 1e-7 + testing::random_unitary(4, rng);
  const json j = json::parse(to_json(a).dump());
  const CMatrix b = matrix_from_json(j, "a");
  CHECK(b.rows() == 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      CHECK(b(r, c).real() == a(r, c).real());
      CHECK(b(r, c).imag() == a(r, c).imag());
    }
  CHECK(matrix_from_json(json::parse("[[1, [0, 2]], [[0, -2], 3]]"), "m")(0, 1) == cplx(0, 2));
  CHECK(code_of([] { matrix_from_json(json::parse("[[1, 2], [3]]"), "m"); }) == ErrorCode::kParse);
}

TEST_CASE("spectral data round trip is exact") {
  const json description = {{"kind", "graph"}, {"m", 3}, {"h", 0.5}, {"potential", {{"builtin", "trig"}}}};
  const MatrixProblem p = problem_from_json(description);
  const SpectralDataSet data = forward_spectral(p, 4);
  const std::string text = to_json(data).dump(2);
  const SpectralDataSet back = spectral_data_from_json(json::parse(text));
  REQUIRE(back.entries.size() == data.entries.size());
  for (std::size_t i = 0; i < data.entries.size(); ++i) {
    CHECK(back.entries[i].lambda == data.entries[i].lambda);
    CHECK((back.entries[i].alpha - data.entries[i].alpha).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK(back.shift == data.shift);
  CHECK(back.coefficients.has_value() == data.coefficients.has_value());
  CHECK(to_json(back).dump(2).size() > 0);
  // Re-serialising gives the same text apart from provenance.
  json a = to_json(data), b = to_json(back);
  a.erase("provenance");
  b.erase("provenance");
  CHECK(a.dump() == b.dump());
}

TEST_CASE("problem specifications") {
  SUBCASE("graph builtin trig puts sin, cos, x - pi/2 on the diagonal") {
    const MatrixProblem p = problem_from_json(
        {{"kind", "graph"}, {"m", 3}, {"h", 0.25}, {"potential", {{"builtin", "trig"}}}});
    const CMatrix q = p.Q()(1.0);
    CHECK(std::abs(q(0, 0) - std::sin(1.0)) < 1e-12);
    CHECK(std::abs(q(1, 1) - std::cos(1.0)) < 1e-12);
    CHECK(std::abs(q(2, 2) - (1.0 - kPi / 2)) < 1e-12);
    CHECK(p.graph_h() == 0.25);
  }
  SUBCASE("general problem from matrix terms and a T vector") {
    const json description = json::parse(R"({
      "kind": "general", "m": 2, "h": 0.4, "T_vector": [2, 1],
      "potential": {"matrix": [["sin", 0.2], [0.2, "cos"]]}})");
    const MatrixProblem p = problem_from_json(description);
    CHECK(std::abs(p.T()(0, 0) - 0.8) < 1e-15);
    CHECK(std::abs(p.H()(0, 1) - 0.4 * 0.4) < 1e-15);
    CHECK(std::abs(p.Q()(0.7)(0, 0) - std::sin(0.7)) < 1e-12);
    CHECK(std::abs(p.Q()(0.7)(1, 0) - 0.2) < 1e-15);
  }
  SUBCASE("sampled potential") {
    json mesh = json::array(), values = json::array();
    for (int i = 0; i <= 128; ++i) {
      const double x = kPi * i / 128;
      mesh.push_back(x);
      values.push_back(json::array({json::array({x, 0}), json::array({0, -x})}));
    }
    const MatrixProblem p = problem_from_json(
        {{"kind", "graph"}, {"m", 2}, {"potential", {{"mesh", mesh}, {"values", values}}}});
    CHECK(std::abs(p.Q()(1.0)(0, 0) - 1.0) < 1e-10);
    CHECK(std::abs(p.Q()(1.0)(1, 1) + 1.0) < 1e-10);
  }
  SUBCASE("invalid input") {
    CHECK(code_of([] { problem_from_json({{"kind", "tree"}, {"m", 2}, {"potential", {{"builtin", "zero"}}}}); }) ==
          ErrorCode::kParse);
    CHECK(code_of([] { problem_from_json({{"kind", "graph"}, {"m", 2}, {"potential", {{"builtin", "wave"}}}}); }) ==
          ErrorCode::kParse);
    CHECK(code_of([] { problem_from_json(json::parse(R"({"kind": "graph", "m": 2,
                       "potential": {"matrix": [["sin", 1], [1, "cos"]]}})")); }) != ErrorCode::kParse);
    CHECK(code_of([] { problem_from_json(json::parse(R"({"kind": "general", "m": 2,
                       "T_vector": [1, 0], "H": [[0, [0, 1]], [[0, 1], 0]],
                       "potential": {"builtin": "zero"}})")); }) == ErrorCode::kNotHermitian);
  }
}

TEST_CASE("file helpers map failures to IO and parse errors") {
  CHECK(code_of([] { read_json_file("/nonexistent/x.json"); }) == ErrorCode::kIo);
  const std::string path = "test_io_tmp.json";
  {
    std::ofstream out(path);
    out << "{ not json";
  }
  CHECK(code_of([&] { read_json_file(path); }) == ErrorCode::kParse);
  write_json_file(path, json{{"a", 0.1}});
  CHECK(read_json_file(path).at("a").get<double>() == 0.1);
  std::remove(path.c_str());
}
