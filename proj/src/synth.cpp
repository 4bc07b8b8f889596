#include "ozonecast/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <vector>

#include "ozonecast/errors.hpp"
#include "ozonecast/rng.hpp"
#include "ozonecast/stats.hpp"

namespace ozonecast {

namespace {

struct Date {
    int y, m, d;
    void advance() {
        static const int lens[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
        int len = lens[m - 1];
        if (m == 2 && (y % 4 == 0 && (y % 100 != 0 || y % 400 == 0))) len = 29;
        if (++d > len) {
            d = 1;
            if (++m > 12) {
                m = 1;
                ++y;
            }
        }
    }
    std::string iso() const {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
        return buf;
    }
};

const char* kCloudClasses[4] = {"clear", "few", "broken", "overcast"};

struct Day {
    std::string date;
    double peak, noon, t_min, t_max, wind;
    std::string cloud[8];
    double clear_freq;
};

std::set<std::size_t> spaced_days(std::size_t count, std::size_t span, std::size_t margin,
                                  Rng& rng) {
    std::set<std::size_t> days;
    if (count == 0 || span <= 2 * margin) return days;
    const std::size_t usable = span - 2 * margin;
    const std::size_t stride = std::max<std::size_t>(1, usable / std::max<std::size_t>(count, 1));
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t base = margin + k * stride;
        const std::size_t jitter = stride > 2 ? rng.below(stride / 2) : 0;
        days.insert(std::min(base + jitter, span - 1));
    }
    // collisions from jitter: pad forward
    while (days.size() < count) {
        const std::size_t extra = margin + rng.below(usable);
        days.insert(extra);
    }
    return days;
}

std::vector<Day> simulate(std::size_t n_days, Date start, const std::set<std::size_t>& planted,
                          bool cap_non_planted, const SynthConfig& cfg, Rng& rng,
                          double* episode_state) {
    std::vector<Day> days(n_days);
    double s = *episode_state;
    double s_prev = s;
    Date date = start;
    for (std::size_t t = 0; t < n_days; ++t) {
        s_prev = s;
        s = 0.75 * s + 0.66 * rng.normal();
        const bool is_planted = planted.count(t) > 0;
        // planted episodes straddle the exceedance band rather than sitting
        // safely above it
        if (is_planted) s = 2.1 + std::fabs(rng.normal(0.0, 0.45));
        if (cap_non_planted && !is_planted) s = std::min(s, 1.7);

        Day& day = days[t];
        day.date = date.iso();
        date.advance();

        day.t_max = 24.0 + 5.0 * s + rng.normal(0.0, 1.8);
        day.t_min = day.t_max - 10.0 + rng.normal(0.0, 1.2);
        day.wind = std::max(0.4, 4.2 - 1.6 * s + rng.normal(0.0, 0.9));
        day.noon = std::max(5.0, 70.0 + 24.0 * (0.6 * s + 0.4 * s_prev) + rng.normal(0.0, 7.0));

        int clear_count = 0;
        const double p_clear = sigmoid(1.6 * (s - 0.2));
        for (int k = 0; k < 8; ++k) {
            const double u = rng.uniform01();
            if (u < p_clear) {
                day.cloud[k] = kCloudClasses[0];
                ++clear_count;
            } else {
                const double v = rng.uniform01();
                day.cloud[k] = v < 0.40 ? kCloudClasses[1] : (v < 0.75 ? kCloudClasses[2] : kCloudClasses[3]);
            }
        }
        day.clear_freq = clear_count / 8.0;

        // the episode boost accelerates at the top of the range, which a
        // bulk-MSE regressor systematically underpredicts
        const double boost = 16.0 * sigmoid(6.0 * (s - 1.9)) * day.clear_freq;
        double peak = 86.0 + 26.0 * s + 0.22 * (day.noon - 70.0) - 2.2 * (day.wind - 4.0) +
                      7.0 * (day.clear_freq - 0.5) + boost + rng.normal(0.0, cfg.noise_sd);
        if (cap_non_planted && !is_planted && peak >= cfg.threshold - 4.0)
            peak = cfg.threshold - 4.0 - 4.0 * rng.uniform01();
        if (cap_non_planted && is_planted)
            peak = std::max(peak, cfg.threshold + 2.0 + 4.0 * rng.uniform01());
        day.peak = std::max(5.0, peak);
    }
    *episode_state = s;
    return days;
}

void write_csv(const std::filesystem::path& path, const std::vector<Day>& days) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << "date,o3_peak,o3_noon,t_min,t_max,wind_speed";
    for (int k = 0; k < 8; ++k) out << ",cloud@" << k;
    out << "\n";
    char buf[64];
    for (const auto& d : days) {
        out << d.date;
        std::snprintf(buf, sizeof(buf), ",%.3f,%.3f,%.3f,%.3f,%.3f", d.peak, d.noon, d.t_min,
                      d.t_max, d.wind);
        out << buf;
        for (int k = 0; k < 8; ++k) out << "," << d.cloud[k];
        out << "\n";
    }
}

}  // namespace

CsvSchema synth_schema() {
    CsvSchema schema;
    schema.date = "date";
    schema.target = "o3_peak";
    schema.persistence = "o3_noon";
    schema.numeric = {"t_min", "t_max", "wind_speed"};
    CategoricalSpec cloud;
    cloud.name = "cloud";
    cloud.classes = {"clear", "few", "broken", "overcast"};
    cloud.intervals = 8;
    schema.categorical.push_back(cloud);
    return schema;
}

SynthResult write_synthetic_season(const std::filesystem::path& train_csv,
                                   const std::filesystem::path& validation_csv,
                                   const SynthConfig& cfg) {
    Rng rng(cfg.seed);
    double episode_state = rng.normal();

    // roughly 2% planted training episodes, like the observed exceedance rarity
    const std::size_t train_planted = std::max<std::size_t>(3, cfg.train_days / 50);
    const auto train_days_planted = spaced_days(train_planted, cfg.train_days, 5, rng);
    const auto train =
        simulate(cfg.train_days, {1999, 4, 1}, train_days_planted, false, cfg, rng, &episode_state);

    episode_state = 0.0;
    const auto val_days_planted =
        spaced_days(cfg.planted_validation_exceedances, cfg.validation_days, 3, rng);
    const auto validation = simulate(cfg.validation_days, {2003, 4, 1}, val_days_planted, true, cfg,
                                     rng, &episode_state);

    write_csv(train_csv, train);
    write_csv(validation_csv, validation);

    SynthResult res;
    for (const auto& d : train) res.train_exceedances += d.peak >= cfg.threshold ? 1 : 0;
    for (const auto& d : validation)
        res.validation_exceedances += d.peak >= cfg.threshold ? 1 : 0;
    return res;
}

}  // namespace ozonecast
