// tandem-ht <kind> --config <file> [--seed N] [--out DIR] [--profile fast|full]
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "tandem/experiment.hpp"
#include "tandem/numerics.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kCheckFailure = 1;
constexpr int kConfigError = 2;

void print_summary(const tandem::RunReport& report, const std::vector<std::string>& written) {
  for (const auto& c : report.checks) {
    std::printf("%-4s %-32s %.6g %s %.6g\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.statistic,
                c.relation.c_str(), c.tolerance);
  }
  for (const auto& note : report.notes) std::printf("note %s\n", note.c_str());
  for (const auto& path : written) std::printf("wrote %s\n", path.c_str());
  std::printf("%s: %s in %.2fs\n", tandem::to_string(report.spec.kind).c_str(),
              report.passed() ? "all checks passed" : "check failure", report.seconds);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heavy-traffic laboratory for a tandem queue with reused service times"};
  app.set_version_flag("--version", tandem::version_string());
  std::string kind_name;
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  std::string profile;
  int threads = -1;
  app.add_option("kind", kind_name, "Experiment kind")
      ->required()
      ->check(CLI::IsMember(tandem::kind_names()));
  app.add_option("--config,-c", config, "JSON experiment specification")->required();
  auto* seed_opt = app.add_option("--seed", seed, "Master seed (overrides the config)");
  app.add_option("--out,-o", out, "Output directory (default: the config's \"out\" or .)");
  app.add_option("--profile", profile, "Sample-size profile")
      ->check(CLI::IsMember({"fast", "full"}));
  app.add_option("--threads", threads, "Worker threads, 0 = one per core (overrides the config)")
      ->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfigError;
  }

  tandem::RunReport report;
  try {
    auto spec = tandem::ExperimentSpec::from_file(config, tandem::parse_kind(kind_name));
    if (*seed_opt) spec.seed = seed;
    if (!profile.empty()) spec.profile = *tandem::parse_profile(profile);
    if (threads >= 0) spec.threads = static_cast<unsigned>(threads);
    if (!out.empty()) spec.out = out;
    if (spec.out.empty()) spec.out = ".";
    report = tandem::run(spec);
  } catch (const tandem::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const tandem::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kCheckFailure;
  }

  std::vector<std::string> written;
  try {
    written = tandem::write_outputs(report, report.spec.out);
  } catch (const std::exception& e) {
    std::cerr << "output error: " << e.what() << '\n';
    return kConfigError;
  }
  print_summary(report, written);
  return report.passed() ? kPass : kCheckFailure;
}
