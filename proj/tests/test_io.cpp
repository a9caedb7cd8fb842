#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "rankmip/data_io.hpp"
#include "rankmip/synthetic.hpp"

using namespace rankmip;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& content = "") : path(name) {
    if (!content.empty()) {
      std::ofstream f(path);
      f << content;
    }
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("csv smoke load with header and label column") {
  TempFile t("io_smoke.csv", "a,b,label\n1,2,1\n3,4,0\n5,6,1\n");
  std::vector<std::string> warnings;
  Dataset d = load_csv(t.path, &warnings);
  CHECK(d.n() == 3);
  CHECK(d.dim() == 2);
  CHECK(d.feature_names == std::vector<std::string>{"a", "b"});
  CHECK(d.labels == std::vector<int>{1, 0, 1});
  REQUIRE(d.scaling.has_value());
  CHECK(d.features.at(0, 0) == -1.0);  // scaled to [-1, 1]
  CHECK(d.features.at(2, 0) == 1.0);
  CHECK(warnings.empty());
}

TEST_CASE("csv validation errors name the offender") {
  TempFile bad_label("io_badlabel.csv", "a,label\n1,1\n2,2\n");
  CHECK_THROWS_WITH(load_csv(bad_label.path), Catch::Matchers::ContainsSubstring("'2' is not 0 or 1"));
  TempFile bad_cell("io_badcell.csv", "a,label\n1,1\nx,0\n");
  CHECK_THROWS_WITH(load_csv(bad_cell.path), Catch::Matchers::ContainsSubstring("row 2"));
  TempFile no_label("io_nolabel.csv", "a,b\n1,2\n");
  CHECK_THROWS_WITH(load_csv(no_label.path), Catch::Matchers::ContainsSubstring("label"));
  TempFile empty("io_empty.csv", "");
  CHECK_THROWS_AS(load_csv(empty.path), ValidationError);
  TempFile header_only("io_header.csv", "a,label\n");
  CHECK_THROWS_AS(load_csv(header_only.path), ValidationError);
}

TEST_CASE("duplicate rows and single-class data come back as warnings") {
  TempFile t("io_dup.csv", "a,b,label\n1,2,1\n1,2,1\n");
  std::vector<std::string> warnings;
  Dataset d = load_csv(t.path, &warnings);
  CHECK(d.n() == 2);
  REQUIRE(warnings.size() == 2);
  CHECK(warnings[0].find("single-class") != std::string::npos);
  CHECK(warnings[1].find("(0,1)") != std::string::npos);
}

TEST_CASE("scaling round trips to 1e-12") {
  Dataset d = generate_gaussians_2d(5);
  Dataset scaled = d.scaled_to_unit();
  Dataset back = scaled.unscaled();
  for (int i = 0; i < d.n(); ++i) {
    for (int j = 0; j < d.dim(); ++j) {
      CHECK(back.features.at(i, j) == Catch::Approx(d.features.at(i, j)).margin(1e-12));
      CHECK(scaled.features.at(i, j) >= -1.0 - 1e-12);
      CHECK(scaled.features.at(i, j) <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("save and load csv round trips values") {
  Dataset d = generate_flip_1d(3);
  TempFile t("io_roundtrip.csv");
  save_csv(d, t.path);
  Dataset loaded = load_csv(t.path);
  REQUIRE(loaded.n() == d.n());
  Dataset raw = loaded.unscaled();
  for (int i = 0; i < d.n(); ++i) {
    CHECK(raw.features.at(i, 0) == Catch::Approx(d.features.at(i, 0)).margin(1e-12));
    CHECK(raw.labels[i] == d.labels[i]);
  }
}

TEST_CASE("model json round trips weights scaling and provenance") {
  ModelFile m;
  m.scorer = LinearScorer({0.25, -1.5, 0.0});
  m.intercept = 0.125;
  m.method = "logistic";
  m.final_loss = 1.75;
  m.iterations_used = 42;
  m.converged = true;
  ColumnScaling sc;
  sc.lo = {-2.0, 0.0, 1.0};
  sc.hi = {2.0, 5.0, 3.0};
  m.scaling = sc;
  TempFile t("io_model.json");
  save_model(m, t.path);
  ModelFile back = load_model(t.path);
  CHECK(back.scorer.weights == m.scorer.weights);
  CHECK(back.intercept == m.intercept);
  CHECK(back.method == "logistic");
  CHECK(back.final_loss == m.final_loss);
  CHECK(back.iterations_used == 42);
  CHECK(back.converged);
  REQUIRE(back.scaling.has_value());
  CHECK(back.scaling->lo == sc.lo);
  CHECK(back.scaling->hi == sc.hi);
}

TEST_CASE("flip generator hits the exact clump counts") {
  Dataset d = generate_flip_1d(99);
  CHECK(d.n() == 6090);
  CHECK(d.dim() == 1);
  CHECK(d.num_positives() == 3080);
  // clumps sit where they were placed
  CHECK(d.features.at(0, 0) == Catch::Approx(3.0).margin(0.5));
  CHECK(d.features.at(6089, 0) == Catch::Approx(-10.0).margin(0.5));
}

TEST_CASE("gaussians generator subsamples to 1250 points") {
  Dataset d = generate_gaussians_2d(42);
  CHECK(d.n() == 1250);
  CHECK(d.dim() == 2);
  CHECK(d.has_both_classes());
}

TEST_CASE("generators are bit-identical under a fixed seed") {
  for (const char* name : {"flip-1d", "gaussians-2d"}) {
    Dataset a = generate_synthetic(name, 7);
    Dataset b = generate_synthetic(name, 7);
    CHECK(a.features.data == b.features.data);
    CHECK(a.labels == b.labels);
    Dataset c = generate_synthetic(name, 8);
    CHECK(a.features.data != c.features.data);
  }
  CHECK_THROWS_AS(generate_synthetic("nope", 1), ValidationError);
}
