#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "fixtures.hpp"
#include "nlscma/codebook_io.hpp"

using namespace nlscma;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "nlscma_io_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("nonlinear codebook round trip is exact") {
  NonlinearCodebook cb = fixtures::random_codebook(17);
  cb.lattice = fixtures::hex64();
  const std::string text = codebook_to_json(cb);
  const AnyCodebook back = codebook_from_json(text);
  REQUIRE(std::holds_alternative<NonlinearCodebook>(back));
  const auto& nl = std::get<NonlinearCodebook>(back);
  CHECK(nl.S == cb.S);
  CHECK(nl.labeling == cb.labeling);
  CHECK(nl.layers == cb.layers);
  CHECK(nl.P.image() == cb.P.image());
  CHECK(nl.graph.F == cb.graph.F);
  REQUIRE(nl.lattice.has_value());
  CHECK(nl.lattice->scale == cb.lattice->scale);
  CHECK(codebook_to_json(back) == text);
  CHECK(superimposed_table(nl) == superimposed_table(cb));
}

TEST_CASE("linear codebook round trip is exact") {
  const LinearCodebook lcb = default_linear_baseline();
  const std::string text = codebook_to_json(lcb);
  const AnyCodebook back = codebook_from_json(text);
  REQUIRE(std::holds_alternative<LinearCodebook>(back));
  CHECK(std::get<LinearCodebook>(back).X == lcb.X);
  CHECK(codebook_to_json(back) == text);
}

TEST_CASE("file round trip and atomic write") {
  const fs::path p = scratch("cb.json");
  const AnyCodebook cb = fixtures::nested_grid_codebook();
  save_codebook(p.string(), cb);
  CHECK(read_text_file(p.string()) == codebook_to_json(cb));
  CHECK(codebook_to_json(load_codebook(p.string())) == codebook_to_json(cb));

  write_text_atomic(p.string(), "replaced\n");
  CHECK(read_text_file(p.string()) == "replaced\n");
  int leftovers = 0;
  for (const auto& e : fs::directory_iterator(p.parent_path()))
    if (e.path().filename().string().find(".tmp") != std::string::npos) ++leftovers;
  CHECK(leftovers == 0);
}

TEST_CASE("missing and malformed input") {
  CHECK_THROWS_WITH_AS(load_codebook("/nonexistent/nope.json"), doctest::Contains("file not found"), Error);
  CHECK_THROWS_AS(codebook_from_json("{not json"), Error);
  CHECK_THROWS_AS(codebook_from_json("[]"), Error);
  CHECK_THROWS_AS(codebook_from_json(R"({"version": 1, "type": "nonlinear"})"), Error);

  nlohmann::json j = nlohmann::json::parse(codebook_to_json(fixtures::nested_grid_codebook()));
  j["labeling"][0] = j["labeling"][1];
  CHECK_THROWS_AS(codebook_from_json(j.dump()), Error);

  j = nlohmann::json::parse(codebook_to_json(fixtures::nested_grid_codebook()));
  j["version"] = 99;
  CHECK_THROWS_AS(codebook_from_json(j.dump()), Error);

  j = nlohmann::json::parse(codebook_to_json(fixtures::nested_grid_codebook()));
  j["type"] = "sparse";
  CHECK_THROWS_AS(codebook_from_json(j.dump()), Error);
}

TEST_CASE("tables and constellation export") {
  const AnyCodebook cb = fixtures::nested_grid_codebook();
  const ResourceTables t = tables_of(cb);
  CHECK(t.values.size() == 4);
  const std::string csv = constellation_csv(cb);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 4 * 64);
}
