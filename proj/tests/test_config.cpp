#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>

#include "mtlen/config.hpp"
#include "mtlen/errors.hpp"

using namespace mtlen;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("key-value parsing") {
  std::istringstream in("# header\nT_tot = 1500  # um\n\n  gamma=0.005\nN = 12\n");
  const KeyValues kv = parse_key_values(in);
  CHECK(kv.size() == 3);
  CHECK(kv.at("T_tot") == "1500");
  CHECK(kv.at("gamma") == "0.005");

  const ParameterFile f = parameter_file_from(kv);
  CHECK(f.prescribed.T_tot == 1500.0);
  CHECK(f.prescribed.gamma == 0.005);
  CHECK(f.prescribed.N == 12);
  CHECK(f.observed.v_g_max_plus == 9.0);
  CHECK_FALSE(f.frozen.has_value());
}

TEST_CASE("malformed files are config errors") {
  std::istringstream no_eq("T_tot 1000\n");
  CHECK(kind_of([&] { parse_key_values(no_eq); }) == ErrorKind::Config);
  std::istringstream dup("gamma = 0\ngamma = 1\n");
  CHECK(kind_of([&] { parse_key_values(dup); }) == ErrorKind::Config);
  std::istringstream empty_value("gamma =\n");
  CHECK(kind_of([&] { parse_key_values(empty_value); }) == ErrorKind::Config);

  CHECK(kind_of([] { parameter_file_from({{"tubulin", "3"}}); }) == ErrorKind::Config);
  CHECK(kind_of([] { parameter_file_from({{"T_tot", "1e3x"}}); }) == ErrorKind::Config);
  CHECK(kind_of([] { parameter_file_from({{"N", "2.5"}}); }) == ErrorKind::Config);
  CHECK(kind_of([] { parameter_file_from({{"F_half", "150"}}); }) == ErrorKind::Config);
  CHECK(kind_of([] { read_key_values("/nonexistent/dir/params.cfg"); }) == ErrorKind::Io);
}

TEST_CASE("overrides win and unknown keys are rejected") {
  ParameterFile f = parameter_file_from({{"gamma", "0.005"}});
  apply_override(f, "gamma", "0.03");
  CHECK(f.prescribed.gamma == 0.03);
  CHECK(kind_of([&] { apply_override(f, "lambda_sg_plus", "0.4"); }) == ErrorKind::Config);
  CHECK(kind_of([&] { apply_override(f, "speed", "1"); }) == ErrorKind::Config);
}

TEST_CASE("doubles survive a text round trip") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    CHECK(parse_double(format_double(v), "v") == v);
  }
  CHECK(format_double(150.0) == "150");
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("written parameter sets reload to identical values") {
  PrescribedParams pre;
  pre.gamma = 0.005;
  const ModelParams p = calibrate(ObservedQuantities{}, pre);
  std::stringstream buffer;
  write_model_params(buffer, p);
  const ParameterFile f = parameter_file_from(parse_key_values(buffer));
  REQUIRE(f.frozen.has_value());
  const ModelParams q = resolve(f);
  CHECK(to_key_values(q) == to_key_values(p));
  CHECK(q.lambda_sg_plus == p.lambda_sg_plus);
  CHECK(q.L_crit == p.L_crit);
  CHECK(q.alpha == p.alpha);
}

TEST_CASE("frozen sets accept implied overrides and keep innate values under input changes") {
  const ModelParams p = calibrate(ObservedQuantities{}, PrescribedParams{});
  std::stringstream buffer;
  write_model_params(buffer, p);
  ParameterFile f = parameter_file_from(parse_key_values(buffer));
  apply_override(f, "T_tot", "2500");
  apply_override(f, "F_half", "200");
  const ModelParams q = resolve(f);
  CHECK(q.prescribed.T_tot == 2500.0);
  CHECK(q.F_half == 200.0);
  CHECK(q.lambda_sg_plus == p.lambda_sg_plus);
}

TEST_CASE("file I/O") {
  const auto path = std::filesystem::temp_directory_path() / "mtlen_config_test.cfg";
  const ModelParams p = calibrate(ObservedQuantities{}, PrescribedParams{});
  write_model_params(path, p);
  const ModelParams q = resolve(parameter_file_from(read_key_values(path)));
  CHECK(q.lambda_sg_minus == p.lambda_sg_minus);
  std::filesystem::remove(path);
  CHECK(kind_of([&] { write_model_params("/nonexistent/dir/out.cfg", p); }) == ErrorKind::Io);
}
