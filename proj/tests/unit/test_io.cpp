#include "doctest.h"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "deferlab/config.hpp"
#include "deferlab/errors.hpp"
#include "deferlab/io.hpp"
#include "deferlab/worlds.hpp"

using namespace deferlab;

TEST_CASE("io: shortest round-trip double formatting") {
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(-0.125) == "-0.125");
  CHECK(format_double(0.1) == "0.1");
  // Round-trip: parsing the string recovers the exact double.
  const double v = 1.0 / 3.0;
  CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("io: dataset CSV round-trips values and missing expert fields") {
  std::vector<Sample> data(3);
  data[0] = {{0.25, -1.5}, 1, 2};
  data[1] = {{0.1, 0.2}, 2, std::nullopt};
  data[2] = {{1.0 / 3.0, 0.7}, 1, 1};

  const std::string csv = dataset_to_csv(data);
  CHECK(csv.substr(0, csv.find('\n')) == "x_0,x_1,y,m");

  const std::vector<Sample> back = dataset_from_csv(csv);
  REQUIRE(back.size() == data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(back[i].x == data[i].x);  // bitwise, thanks to shortest round-trip
    CHECK(back[i].y == data[i].y);
    CHECK(back[i].m == data[i].m);
  }

  CHECK_THROWS_AS(dataset_to_csv({}), EmptyDataError);
  std::vector<Sample> ragged = data;
  ragged[1].x = {0.1};
  CHECK_THROWS_AS(dataset_to_csv(ragged), DimensionMismatchError);
  CHECK_THROWS_AS(dataset_from_csv("x_0,y,m\n"), IoError);        // no rows
  CHECK_THROWS_AS(dataset_from_csv("nope\n1,2,3\n"), IoError);    // bad header
  CHECK_THROWS_AS(dataset_from_csv("x_0,y,m\n0.5,1\n"), IoError);  // wrong arity
}

TEST_CASE("io: dataset files round-trip through disk") {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "deferlab_tests" / "io_files";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "toy.csv").string();

  std::vector<Sample> data(2);
  data[0] = {{0.5}, 2, 1};
  data[1] = {{0.75}, 1, std::nullopt};
  write_dataset_csv(path, data);
  const std::vector<Sample> back = read_dataset_csv(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].x == data[0].x);
  CHECK(back[1].m == std::nullopt);
  CHECK_THROWS_AS(read_text_file((dir / "missing.csv").string()), IoError);
}

TEST_CASE("io: atomic world JSON round-trips and validates") {
  const AtomicWorld world = random_atomic_world(4, 3, 77);
  const AtomicWorld back = atomic_world_from_json(atomic_world_to_json(world));
  CHECK(back.num_classes == world.num_classes);
  CHECK(back.points == world.points);
  CHECK(back.masses == world.masses);
  CHECK(back.label_dist == world.label_dist);
  CHECK(back.expert_dist == world.expert_dist);

  CHECK_THROWS_AS(atomic_world_from_json("{not json"), IoError);
  CHECK_THROWS_AS(atomic_world_from_json("{\"num_classes\": 2}"), IoError);
  // Structurally sound JSON with a non-distribution: masses sum to 0.5.
  AtomicWorld bad = world;
  bad.masses[0] = 0.0;
  bad.masses[1] = 0.0;
  CHECK_THROWS_AS(atomic_world_from_json(atomic_world_to_json(bad)), InvalidDistributionError);
}

TEST_CASE("config: sections, typed reads, and strict consumption") {
  Config cfg = Config::parse(
      "# comment\n"
      "experiment = data_tradeoff\n"
      "seed = 11\n"
      "[data]\n"
      "fractions = 0.05, 0.1\n"
      "n_total = 500\n"
      "[train]\n"
      "model = mlp\n"
      "deep = true\n");
  CHECK(cfg.require_string("experiment") == "data_tradeoff");
  CHECK(cfg.get_uint64("seed", 0) == 11);
  CHECK(cfg.get_double_list("data.fractions", {}) == std::vector<double>{0.05, 0.1});
  CHECK(cfg.get_int("data.n_total", 0) == 500);
  CHECK(cfg.get_string("train.model", "linear") == "mlp");
  CHECK(cfg.get_bool("train.deep", false));
  CHECK(cfg.get_int("data.absent", 7) == 7);  // fallback consumes nothing
  cfg.finish();
}

TEST_CASE("config: every malformed input is a ConfigError") {
  CHECK_THROWS_AS(Config::parse("a = 1\na = 2\n"), ConfigError);       // duplicate
  CHECK_THROWS_AS(Config::parse("[unterminated\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("justaword\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("= 3\n"), ConfigError);                // empty key

  Config cfg = Config::parse("n = notanumber\nflag = maybe\n");
  CHECK_THROWS_AS(cfg.get_int("n", 0), ConfigError);
  CHECK_THROWS_AS(cfg.get_bool("flag", false), ConfigError);
  CHECK_THROWS_AS(cfg.require_string("missing"), ConfigError);

  Config leftover = Config::parse("experiment = x\nstray = 1\n");
  leftover.require_string("experiment");
  CHECK_THROWS_AS(leftover.finish(), ConfigError);
}

TEST_CASE("config: experiment header applies defaults") {
  Config cfg = Config::parse("experiment = dod_curve\n");
  const ExperimentConfig exp = read_experiment_config(cfg, 200);
  CHECK(exp.experiment == "dod_curve");
  CHECK(exp.trials == 200);
  CHECK(exp.output_dir == "out");
  CHECK(exp.threads == 0);
  CHECK_FALSE(exp.emit_gnuplot);
  cfg.finish();

  Config bad = Config::parse("experiment = dod_curve\ntrials = 0\n");
  CHECK_THROWS_AS(read_experiment_config(bad, 200), ConfigError);
}
