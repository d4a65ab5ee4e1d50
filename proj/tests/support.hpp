#pragma once

#include "foresight/domain.hpp"
#include "foresight/rng.hpp"

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

namespace testing {

// A scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("foresight-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline foresight::Question question(const std::string& id, std::optional<double> outcome = 1.0,
                                    std::optional<double> market = std::nullopt) {
    foresight::Question q;
    q.id = id;
    q.text = "Will event " + id + " happen by the end of 2024?";
    q.knowledge_cutoff = foresight::Date(2024, 7, 1);
    q.resolution_date = foresight::Date(2024, 12, 31);
    q.outcome = outcome;
    if (market) q.market_price = foresight::Probability(*market);
    return q;
}

inline std::string fixture(const std::string& name) {
    return std::string(FORESIGHT_FIXTURE_DIR) + "/" + name;
}

inline std::vector<foresight::Probability> random_list(foresight::Rng& rng, std::size_t n) {
    std::vector<foresight::Probability> out;
    for (std::size_t i = 0; i < n; ++i) out.emplace_back(rng.uniform01());
    return out;
}

}  // namespace testing
