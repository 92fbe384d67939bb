#include <string>

#include "chanest/config.hpp"
#include "chanest/error.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace chanest;

namespace {

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
    return e.what();
  }
  return "";
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("defaults parse from an empty file") {
  const auto cfg = parse_config("# nothing\n\n");
  CHECK(cfg.trials == 20);
  CHECK(cfg.bits_list == std::vector<int>{1, 2, 3});
  CHECK(cfg.methods.size() == 4);
  CHECK(cfg.gamp.damping_factor == 0.7);
  CHECK(cfg.outer.max_outer_iters == 20);
  CHECK(cfg.outer.components == 4);
}

TEST_CASE("keys, lists and comments") {
  const auto cfg = parse_config(
      "channel.n_t = 8   # inline comment\n"
      "experiment.bits = 1, 3\n"
      "experiment.snr_db = -5,2.5\n"
      "experiment.methods = ls,amp-pe\n"
      "iht.step = 0.25\n"
      "gamp.mean_removal = true\n"
      "quantizer.2bit.thresholds = -1, 0, 1\n"
      "quantizer.2bit.symbols = -1.5, -0.5, 0.5, 1.5\n");
  CHECK(cfg.channel.n_t == 8);
  CHECK(cfg.bits_list == std::vector<int>{1, 3});
  CHECK(cfg.snr_list_db == std::vector<double>{-5.0, 2.5});
  CHECK(cfg.methods == std::vector<std::string>{"ls", "amp-pe"});
  REQUIRE(cfg.iht.step_size.has_value());
  CHECK(*cfg.iht.step_size == 0.25);
  CHECK(cfg.gamp.mean_removal);
  REQUIRE(cfg.quantizers.count(2) == 1);
  CHECK(cfg.quantizers.at(2).thresholds == std::vector<double>{-1.0, 0.0, 1.0});
}

TEST_CASE("errors name the line and the field") {
  CHECK(contains(config_error("channel.n_t = 4\nchannel.n_r = four\n"), "line 2"));
  CHECK(contains(config_error("channel.n_r = four\n"), "channel.n_r"));
  CHECK(contains(config_error("bogus.key = 1\n"), "bogus.key"));
  CHECK(contains(config_error("experiment.methods = amp-pe,bp\n"), "bp"));
  CHECK(contains(config_error("experiment.trials = 0\n"), "experiment.trials"));
  CHECK(contains(config_error("gamp.damping = 1.5\n"), "gamp"));
  CHECK(contains(config_error("just text\n"), "key = value"));
  CHECK(contains(config_error("channel.taps = 600\n"), "channel"));
  CHECK(contains(config_error("quantizer.2bit.symbols = 1,2\n"), "quantizer"));
  CHECK_THROWS_AS(load_config("/nonexistent/file.cfg"), Error);
}

TEST_CASE("round trip through the text form") {
  auto cfg = fixture::desk_config();
  cfg.iht.step_size = 0.123456789012345;
  cfg.snr_list_db = {0.1, 1e-7, 33.3};
  cfg.quantizers[1] = {{0.0}, {-0.7, 0.7}};
  const auto back = parse_config(to_config_text(cfg));
  CHECK(to_config_text(back) == to_config_text(cfg));
  CHECK(back.snr_list_db == cfg.snr_list_db);
  CHECK(*back.iht.step_size == *cfg.iht.step_size);
  CHECK(back.base_seed == cfg.base_seed);
}

TEST_CASE("overrides apply on top of the file") {
  auto cfg = fixture::desk_config();
  apply_override(cfg, "experiment.trials=3");
  apply_override(cfg, "experiment.bits = 2");
  apply_override(cfg, "iht.step=auto");
  CHECK(cfg.trials == 3);
  CHECK(cfg.bits_list == std::vector<int>{2});
  CHECK_FALSE(cfg.iht.step_size.has_value());
  CHECK_NOTHROW(cfg.validate());
  CHECK_THROWS_AS(apply_override(cfg, "experiment.trials"), Error);
  CHECK_THROWS_AS(apply_override(cfg, "experiment.trials=x"), Error);
}

TEST_CASE("quantizer overrides scale with the input RMS") {
  auto cfg = parse_config(
      "quantizer.2bit.thresholds = -1, 0, 1\n"
      "quantizer.2bit.symbols = -1.5, -0.5, 0.5, 1.5\n");
  const auto spec = quantizer_for(cfg, 2, 2.0 * std::sqrt(2.0));
  CHECK(spec.thresholds()[1] == doctest::Approx(-2.0));
  CHECK(spec.symbols()[3] == doctest::Approx(3.0));
  CHECK(*spec.calibrated_power() == doctest::Approx(8.0));
  const auto fallback = quantizer_for(cfg, 3, 1.0);
  CHECK(fallback.bins() == 8);
}
