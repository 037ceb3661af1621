#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "orars/io.hpp"
#include "orars/pairing.hpp"
#include "orars/rng.hpp"

using namespace orars;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("orars_io_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("format_double round-trips exactly") {
  Rng rng(1);
  for (int t = 0; t < 1000; ++t) {
    const double v = rng.uniform(-1e6, 1e6) * std::pow(10.0, rng.uniform(-12, 12));
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(1.5) == "1.5");
}

TEST_CASE("load_csv: 3 rows, 2 features") {
  TempDir tmp;
  write_text_file(tmp.file("d.csv"), "1,2,10\n3,4,20\n5,6,30\n");
  const Dataset ds = load_csv({tmp.file("d.csv")});
  CHECK(ds.size() == 3);
  CHECK(ds.feature_dim() == 2);
  CHECK(ds.label(0) == 10.0);
  CHECK(ds.features()(2, 1) == 6.0);
}

TEST_CASE("load_csv diagnostics name the offending row") {
  TempDir tmp;
  write_text_file(tmp.file("bad_cell.csv"), "1,2,3\n4,x,6\n");
  CHECK_THROWS_WITH_AS(static_cast<void>(load_csv({tmp.file("bad_cell.csv")})),
                       doctest::Contains("row 2"), ParseError);

  write_text_file(tmp.file("ragged.csv"), "1,2,3\n4,5\n");
  CHECK_THROWS_WITH_AS(static_cast<void>(load_csv({tmp.file("ragged.csv")})),
                       doctest::Contains("row 2"), ParseError);

  write_text_file(tmp.file("missing.csv"), "1,2,3\n4,,6\n");
  CHECK_THROWS_WITH_AS(static_cast<void>(load_csv({tmp.file("missing.csv")})),
                       doctest::Contains("row 2"), ParseError);

  write_text_file(tmp.file("empty.csv"), "");
  CHECK_THROWS_AS(static_cast<void>(load_csv({tmp.file("empty.csv")})), ParseError);

  CHECK_THROWS_AS(static_cast<void>(load_csv({tmp.file("nonexistent.csv")})), IoError);
}

TEST_CASE("load_csv honors header, delimiter and target column") {
  TempDir tmp;
  write_text_file(tmp.file("h.csv"), "a;b;c\n1;2;3\n4;5;6\n");
  DatasetFileSpec spec{tmp.file("h.csv"), ';', 0, true};
  const Dataset ds = load_csv(spec);
  CHECK(ds.size() == 2);
  CHECK(ds.feature_dim() == 2);
  CHECK(ds.label(0) == 1.0);     // target is column 0
  CHECK(ds.features()(0, 0) == 2.0);

  spec.target_column = 5;
  CHECK_THROWS_AS(static_cast<void>(load_csv(spec)), InvalidConfig);
}

TEST_CASE("a 43-row 2-attribute file loads with its label range intact") {
  TempDir tmp;
  Rng rng(43);
  std::string text;
  for (int i = 0; i < 43; ++i) {
    const double label =
        i == 0 ? 3.0 : (i == 1 ? 6.6 : rng.uniform(3.0, 6.6));  // pin the endpoints
    text += format_double(rng.uniform(0, 1)) + "," + format_double(rng.uniform(0, 1)) + "," +
            format_double(label) + "\n";
  }
  write_text_file(tmp.file("d43.csv"), text);
  const Dataset ds = load_csv({tmp.file("d43.csv")});
  CHECK(ds.size() == 43);
  CHECK(ds.feature_dim() == 2);
  CHECK(ds.labels().minCoeff() >= 3.0);
  CHECK(ds.labels().maxCoeff() <= 6.6);
  CHECK(label_range(ds.labels()) == doctest::Approx(3.6));
}

TEST_CASE("write_csv then load_csv reproduces the dataset bit-exactly") {
  TempDir tmp;
  const Dataset ds = synth_dataset(SynthKind::linear, 40, 3, 0.3, 7).dataset;
  write_csv(ds, tmp.file("round.csv"));
  const Dataset back = load_csv({tmp.file("round.csv")});
  CHECK(back.size() == ds.size());
  CHECK(back.features() == ds.features());
  CHECK(back.labels() == ds.labels());
}

TEST_CASE("synth_dataset: determinism and kinds") {
  const SynthResult a = synth_dataset(SynthKind::linear, 30, 2, 0.1, 5);
  const SynthResult b = synth_dataset(SynthKind::linear, 30, 2, 0.1, 5);
  CHECK(a.dataset.features() == b.dataset.features());
  CHECK(a.dataset.labels() == b.dataset.labels());
  CHECK(a.weights == b.weights);

  // noise-free linear labels are exactly w.x + b
  const SynthResult clean = synth_dataset(SynthKind::linear, 25, 3, 0.0, 9);
  for (Index i = 0; i < clean.dataset.size(); ++i) {
    const double expected =
        clean.weights.dot(clean.dataset.sample_features(i).transpose()) + clean.bias;
    CHECK(clean.dataset.label(i) == expected);
  }

  const SynthResult constant = synth_dataset(SynthKind::constant, 10, 2, 0.0, 3);
  CHECK_THROWS_AS(label_range(constant.dataset.labels()), DegenerateRange);

  const SynthResult monotone = synth_dataset(SynthKind::monotone_noisy, 10, 2, 0.0, 3);
  for (Index i = 0; i < monotone.dataset.size(); ++i) {
    CHECK(monotone.dataset.label(i) == monotone.dataset.features()(i, 0));
  }

  CHECK_THROWS_AS(synth_dataset(SynthKind::linear, 1, 2, 0.0, 1), InvalidConfig);
  CHECK_THROWS_AS(synth_kind_from_string("cubic"), InvalidConfig);
}

TEST_CASE("key-value config: parsing, defaults, diagnostics") {
  const KeyValueConfig empty = KeyValueConfig::parse_string("");
  CHECK(empty.entries().empty());
  CHECK(empty.get_int("k", 5) == 5);  // all defaults

  const KeyValueConfig kv = KeyValueConfig::parse_string(
      "# comment\n"
      "k = 7\n"
      "seed=42\n"
      "\n"
      "name = hello world\n");
  CHECK(kv.get_int("k", 5) == 7);
  CHECK(kv.get_u64("seed", 0) == 42);
  CHECK(kv.get_string("name", "") == "hello world");
  CHECK(kv.get_int("missing", -1) == -1);

  CHECK_THROWS_AS(KeyValueConfig::parse_string("novalue\n"), ParseError);
  CHECK_THROWS_AS(KeyValueConfig::parse_string("a=1\na=2\n"), ParseError);
  CHECK_THROWS_AS(KeyValueConfig::parse_string("= 3\n"), ParseError);
  CHECK_THROWS_AS(kv.get_int("name", 0), InvalidConfig);

  CHECK_THROWS_WITH_AS(kv.reject_unknown_keys({"k", "seed"}), doctest::Contains("name"),
                       InvalidConfig);
  CHECK_NOTHROW(kv.reject_unknown_keys({"k", "seed", "name"}));
}

TEST_CASE("environment overrides apply to known keys") {
  KeyValueConfig kv = KeyValueConfig::parse_string("k = 3\n");
  ::setenv("ORARS_K", "9", 1);
  ::setenv("ORARS_SEED", "123", 1);
  kv.apply_env_overrides({"k", "seed"});
  ::unsetenv("ORARS_K");
  ::unsetenv("ORARS_SEED");
  CHECK(kv.get_int("k", 0) == 9);
  CHECK(kv.get_u64("seed", 0) == 123);
}

TEST_CASE("to_config_text emits parseable sorted lines") {
  const std::string text = to_config_text({{"b", "2"}, {"a", "1"}});
  CHECK(text == "a = 1\nb = 2\n");
  const KeyValueConfig kv = KeyValueConfig::parse_string(text);
  CHECK(kv.get_int("a", 0) == 1);
  CHECK(kv.get_int("b", 0) == 2);
}
