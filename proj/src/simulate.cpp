#include "probeable/simulate.hpp"

#include <cmath>
#include <random>

#include <fmt/format.h>

#include "probeable/error.hpp"

namespace probeable {

using nlohmann::json;

namespace {

constexpr char kCategoryLetters[4] = {'A', 'B', 'C', 'D'};

// Geometric count with the given mean, clamped to [0, cap].
std::size_t draw_count(std::mt19937_64 &rng, double mean, std::size_t cap) {
    if (mean <= 0) return 0;
    std::geometric_distribution<std::size_t> dist(1.0 / (1.0 + mean));
    return std::min(dist(rng), cap);
}

bool draw_bernoulli(std::mt19937_64 &rng, double p) {
    if (p <= 0) return false;
    if (p >= 1) return true;
    return std::bernoulli_distribution(p)(rng);
}

}  // namespace

void SimulationConfig::validate() const {
    for (std::size_t c = 0; c < categories.size(); ++c) {
        const auto &b = categories[c];
        auto bad = [&](const char *what) {
            throw ConfigError(fmt::format("category {}: {}", kCategoryLetters[c], what));
        };
        if (!(b.fail_probability >= 0 && b.fail_probability <= 1)) bad("fail_probability must be in [0, 1]");
        if (!(b.default_probe_probability >= 0 && b.default_probe_probability <= 1))
            bad("default_probe_probability must be in [0, 1]");
        if (!(b.mean_probes_before_code >= 0) || !std::isfinite(b.mean_probes_before_code))
            bad("mean_probes_before_code must be a non-negative number");
        if (!(b.mean_probes_after_fail >= 0) || !std::isfinite(b.mean_probes_after_fail))
            bad("mean_probes_after_fail must be a non-negative number");
    }
    if (max_submissions == 0) throw ConfigError("max_submissions must be at least 1");
    for (const auto &p : problems) {
        if (p.empty()) throw ConfigError("empty problem id");
    }
}

SimulationConfig SimulationConfig::defaults() {
    SimulationConfig c;
    c.categories[0] = {50, 12.0, 0.30, 3.0, 0.8};
    c.categories[1] = {50, 7.0, 0.40, 2.0, 0.8};
    c.categories[2] = {50, 3.0, 0.50, 1.5, 0.8};
    c.categories[3] = {50, 0.8, 0.60, 1.0, 0.8};
    return c;
}

SimulationConfig simulation_config_from_json(const json &j) {
    auto c = SimulationConfig::defaults();
    try {
        c.seed = j.value("seed", c.seed);
        c.max_submissions = j.value("max_submissions", c.max_submissions);
        c.max_probes = j.value("max_probes", c.max_probes);
        if (j.contains("problems")) c.problems = j.at("problems").get<std::vector<std::string>>();
        if (j.contains("categories")) {
            for (const auto &[name, b] : j.at("categories").items()) {
                auto pos = std::string_view("ABCD").find(name);
                if (name.size() != 1 || pos == std::string_view::npos)
                    throw ConfigError("unknown category '" + name + "'");
                auto &dst = c.categories[pos];
                dst.students = b.value("students", dst.students);
                dst.mean_probes_before_code = b.value("mean_probes_before_code", dst.mean_probes_before_code);
                dst.fail_probability = b.value("fail_probability", dst.fail_probability);
                dst.mean_probes_after_fail = b.value("mean_probes_after_fail", dst.mean_probes_after_fail);
                dst.default_probe_probability = b.value("default_probe_probability", dst.default_probe_probability);
            }
        }
    } catch (const json::exception &e) {
        throw ConfigError(std::string("simulation config: ") + e.what());
    }
    c.validate();
    return c;
}

SimulationOutput simulate(const SimulationConfig &config) {
    config.validate();
    SimulationOutput out;
    std::mt19937_64 rng(config.seed);
    std::uint64_t next_payload = 1;
    // 2024-08-05T09:00:00Z
    Timestamp clock{std::chrono::milliseconds(1722848400000LL)};

    auto emit = [&](const std::string &student, const std::string &problem, std::uint64_t seq, EventKind kind,
                    bool is_default) {
        const auto id = fmt::format("pl-{}", next_payload++);
        json payload{{"synthetic", true}, {"type", kind == EventKind::probe ? "probe" : "submission"}};
        out.log += json{{"rec", "payload"}, {"id", id}, {"data", payload}}.dump() + "\n";
        clock += std::chrono::seconds(20 + static_cast<int>(rng() % 100));
        AttemptEvent e{student, problem, seq, clock, kind, is_default, id};
        out.log += event_to_json(e).dump() + "\n";
    };

    static constexpr const char *kSuffixes[3] = {"+", "", "-"};
    for (std::size_t c = 0; c < config.categories.size(); ++c) {
        const auto &behaviour = config.categories[c];
        for (std::size_t s = 0; s < behaviour.students; ++s) {
            const auto student = fmt::format("s{}{:04}", static_cast<char>(kCategoryLetters[c] + ('a' - 'A')), s + 1);
            out.roster.add(student, fmt::format("{}{}", kCategoryLetters[c], kSuffixes[rng() % 3]));

            for (const auto &problem : config.problems) {
                std::uint64_t seq = 0;
                if (draw_bernoulli(rng, behaviour.default_probe_probability)) {
                    emit(student, problem, ++seq, EventKind::probe, true);
                }
                const auto before = draw_count(rng, behaviour.mean_probes_before_code, config.max_probes);
                for (std::size_t k = 0; k < before; ++k) emit(student, problem, ++seq, EventKind::probe, false);
                for (std::size_t sub = 0; sub < config.max_submissions; ++sub) {
                    if (!draw_bernoulli(rng, behaviour.fail_probability)) {
                        emit(student, problem, ++seq, EventKind::success, false);
                        break;
                    }
                    emit(student, problem, ++seq, EventKind::fail, false);
                    const auto after = draw_count(rng, behaviour.mean_probes_after_fail, config.max_probes);
                    for (std::size_t k = 0; k < after; ++k) emit(student, problem, ++seq, EventKind::probe, false);
                }
            }
        }
    }
    return out;
}

}  // namespace probeable
