#pragma once

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "vcm/core/types.hpp"
#include "vcm/util/binary_io.hpp"
#include "vcm/util/process.hpp"

namespace testing_support {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("vcm_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::filesystem::path data_dir() { return VCM_TEST_DATA; }

struct CliResult {
  int exit_code;
  std::string out;
  std::string err;
};

/// Runs the vcmbench binary with the given arguments.
inline CliResult vcmbench(const std::vector<std::string>& args, const TempDir& scratch) {
  std::vector<std::string> argv{VCMBENCH_PATH};
  argv.insert(argv.end(), args.begin(), args.end());
  auto r = vcm::proc::run(argv, scratch / "cli.stderr", scratch / "cli.stdout");
  return {r.exit_code, r.stdout_text, r.stderr_text};
}

/// Manifest for the blob fixture with the synthetic detector as task network.
inline std::filesystem::path write_detector_manifest(const TempDir& dir, const std::vector<int>& qps,
                                                     const std::vector<int>& scales) {
  const auto fixture = data_dir() / "detector_fixture";
  nlohmann::ordered_json items = nlohmann::ordered_json::array();
  const std::pair<const char*, std::pair<int, int>> specs[] = {{"d0", {160, 96}}, {"d1", {120, 80}}};
  for (const auto& [id, wh] : specs)
    items.push_back({{"id", id},
                     {"width", wh.first},
                     {"height", wh.second},
                     {"raw", (fixture / (std::string(id) + ".yuv")).string()},
                     {"ground_truth", (fixture / (std::string(id) + ".gt.jsonl")).string()}});
  nlohmann::ordered_json m{{"schema_version", 1},
                           {"task", "detection"},
                           {"scales", scales},
                           {"codec", {{"kind", "TRUNCATE"}, {"qps", qps}}},
                           {"prediction_command", std::string(SYNTHETIC_DETECTOR_PATH) +
                                                      " {input} {output} {width} {height} {image_id}"},
                           {"iou_thresholds", {0.5}},
                           {"items", items}};
  const auto path = dir / "manifest.json";
  vcm::io::write_text(path, m.dump(2) + "\n");
  return path;
}

inline vcm::RDCurve random_curve(std::mt19937_64& rng, std::size_t n, const std::string& label = "c") {
  std::uniform_real_distribution<double> step(0.05, 0.5), dq(0.01, 0.1);
  vcm::RDCurve c{label, std::nullopt, {}, ""};
  double lr = std::uniform_real_distribution<double>(-2.0, 0.0)(rng);
  double q = std::uniform_real_distribution<double>(0.1, 0.5)(rng);
  for (std::size_t i = 0; i < n; ++i) {
    c.points.push_back({std::pow(10.0, lr), q});
    lr += step(rng);
    q += dq(rng);
  }
  return c;
}

inline vcm::FeatureTensor random_tensor(std::mt19937_64& rng, vcm::TensorDims d, double scale = 3.0) {
  std::normal_distribution<float> n(0.5f, static_cast<float>(scale));
  std::vector<float> v(d.count());
  for (auto& x : v) x = n(rng);
  return vcm::FeatureTensor(d, std::move(v));
}

}  // namespace testing_support
