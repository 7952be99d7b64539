#include <doctest.h>

#include <cmath>

#include "hapticdrone/confusion.hpp"
#include "hapticdrone/errors.hpp"

using namespace hapticdrone;
using namespace hapticdrone::eval;

namespace {

ConfusionMatrix table() { return load_confusion(HD_SOURCE_DIR "/data/recognition_study_confusion.json"); }

// Independent marginalization straight from the 9x9 index layout
// (row = 3 * shape + vibration).
double shape_entry(const ConfusionMatrix& m, int s, int s2) {
  double acc = 0.0;
  for (int v = 0; v < 3; ++v) {
    for (int v2 = 0; v2 < 3; ++v2) acc += m.rows[3 * s + v][3 * s2 + v2];
  }
  return acc / 3.0;
}

double vibration_entry(const ConfusionMatrix& m, int v, int v2) {
  double acc = 0.0;
  for (int s = 0; s < 3; ++s) {
    for (int s2 = 0; s2 < 3; ++s2) acc += m.rows[3 * s + v][3 * s2 + v2];
  }
  return acc / 3.0;
}

}  // namespace

TEST_SUITE("confusion") {
  TEST_CASE("table diagonals") {
    const auto agg = aggregate_confusion(table());
    const double shape_diag[] = {0.69, 0.80, 0.76};
    const double vib_diag[] = {0.65, 0.73, 0.88};
    REQUIRE(agg.shape.size() == 3);
    REQUIRE(agg.vibration.size() == 3);
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(agg.shape.rows[i][i] - shape_diag[i]) <= 0.01);
      CHECK(std::abs(agg.vibration.rows[i][i] - vib_diag[i]) <= 0.01);
    }
    CHECK(agg.shape.labels == std::vector<std::string>{"circle", "square", "cone"});
    CHECK(agg.vibration.labels == std::vector<std::string>{"high", "low", "null"});
    CHECK(std::abs(agg.full_diagonal_mean - 0.569) <= 0.001);
    CHECK(agg.shape_diagonal_mean == doctest::Approx(0.75).epsilon(1e-3));
    CHECK(agg.vibration_diagonal_mean == doctest::Approx(0.7533).epsilon(1e-3));
  }

  TEST_CASE("marginals match the direct index sum") {
    const auto m = table();
    const auto agg = aggregate_confusion(m);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        CHECK(agg.shape.rows[a][b] == doctest::Approx(shape_entry(m, a, b)));
        CHECK(agg.vibration.rows[a][b] == doctest::Approx(vibration_entry(m, a, b)));
      }
    }
  }

  TEST_CASE("row stochasticity is preserved") {
    const auto m = table();
    m.validate();
    const auto agg = aggregate_confusion(m);
    for (const auto* mm : {&agg.shape, &agg.vibration}) {
      for (const auto& row : mm->rows) {
        double sum = 0.0;
        for (double x : row) sum += x;
        CHECK(std::abs(sum - 1.0) <= 0.02);
      }
    }
  }

  TEST_CASE("identity matrix aggregates to identities") {
    ConfusionMatrix m = table();
    for (std::size_t i = 0; i < 9; ++i) {
      for (std::size_t j = 0; j < 9; ++j) m.rows[i][j] = i == j ? 1.0 : 0.0;
    }
    const auto agg = aggregate_confusion(m);
    CHECK(agg.full_diagonal_mean == 1.0);
    CHECK(agg.shape_diagonal_mean == 1.0);
    CHECK(agg.vibration_diagonal_mean == 1.0);
  }

  TEST_CASE("label order follows the input") {
    auto m = table();
    // Swap the first two classes consistently in rows, columns and labels.
    std::swap(m.labels[0], m.labels[3]);
    std::swap(m.rows[0], m.rows[3]);
    for (auto& row : m.rows) std::swap(row[0], row[3]);
    const auto agg = aggregate_confusion(m);
    CHECK(agg.shape.labels.front() == "square");
    CHECK(agg.full_diagonal_mean == doctest::Approx(0.5689).epsilon(1e-3));
  }

  TEST_CASE("invalid inputs") {
    auto m = table();
    m.labels[8] = "circle/high";
    CHECK_THROWS_AS(aggregate_confusion(m), InputError);
    m = table();
    m.rows.pop_back();
    CHECK_THROWS_AS(m.validate(), InputError);
    m = table();
    m.rows[0][0] = 1.5;
    CHECK_THROWS_AS(m.validate(), InputError);
    CHECK_THROWS(parse_confusion("{\"labels\": 3}"));
    CHECK_THROWS(parse_confusion("not json"));
  }

  TEST_CASE("dash entries read as zero") {
    const auto m = parse_confusion(R"({"labels":["a","b"],"rows":[[1,"-"],[null,1]]})");
    CHECK(m.rows[0][1] == 0.0);
    CHECK(m.rows[1][0] == 0.0);
    CHECK(m.diagonal_mean() == 1.0);
  }

  TEST_CASE("pattern labels") {
    CHECK(parse_pattern_label("circle/high") == HapticPattern{Shape::Sphere, VibrationLevel::High});
    CHECK(parse_pattern_label("square/null") == HapticPattern{Shape::Cube, VibrationLevel::Null});
    CHECK(parse_pattern_label("cone/low") == HapticPattern{Shape::Cone, VibrationLevel::Low});
    CHECK_THROWS(parse_pattern_label("cone"));
    CHECK_THROWS(parse_pattern_label("blob/high"));
  }

  TEST_CASE("formatted matrix lists every label") {
    const auto text = format_matrix(aggregate_confusion(table()).shape);
    for (const char* l : {"circle", "square", "cone"}) CHECK(text.find(l) != std::string::npos);
  }
}
