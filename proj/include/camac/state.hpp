#ifndef CAMAC_STATE_HPP
#define CAMAC_STATE_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "camac/errors.hpp"
#include "camac/numerics.hpp"

namespace camac {

// Per-step world observation assembled from six concatenated blocks. The
// base block carries operational state (per-vehicle and per-station); the
// remaining blocks carry the 20 designated context features. Geographic
// availability lives inside the base block, so the spatial block is kept
// for layout completeness and stays empty in this simulator.
//
// Base layout, per EV (8): soc, required_soc, deadline_remaining, capacity,
//   plugged_code, x, y, class_code; per station (3): free_port_frac,
//   queue_norm, price_norm. plugged_code encodes the station index as
//   (sid+1)/(n_stations+1), 0 meaning unplugged.
//
// Context features, fixed order (20):
//   weather: temperature, solar irradiance, precipitation, wind        (4)
//   traffic: congestion index, mean travel-time factor, incident flag  (3)
//   pricing: current tariff, next-hour tariff, demand-response signal  (3)
//   grid: mean transformer loading, min voltage p.u., frequency
//         deviation, peak-period flag                                  (4)
//   renewable: solar forecast, wind forecast, renewable share          (3)
//   temporal: hour-of-day sine, hour-of-day cosine, weekend flag       (3)
struct ContextState {
    Vec base;
    Vec temporal;  // [tariff_now, tariff_next, dr_signal, hour_sin, hour_cos, weekend]
    Vec spatial;   // empty; availability features are part of base
    Vec grid;      // [mean_loading, min_voltage, freq_deviation, peak_flag]
    Vec weather;   // [temperature, irradiance, precipitation, wind, solar_fc, wind_fc, renew_share]
    Vec traffic;   // [congestion, travel_factor, incident]
    int t = 0;

    static constexpr int kEvFeatures = 8;
    static constexpr int kStationFeatures = 3;
    static constexpr int kContextFeatures = 20;

    int n_ctx() const {
        return static_cast<int>(base.size() + temporal.size() + spatial.size() + grid.size() +
                                weather.size() + traffic.size());
    }

    // Concatenation in block order (base, temporal, spatial, grid, weather, traffic).
    Vec flat() const {
        Vec out;
        out.reserve(n_ctx());
        for (const Vec* b : {&base, &temporal, &spatial, &grid, &weather, &traffic})
            out.insert(out.end(), b->begin(), b->end());
        return out;
    }

    // The 20 context features in canonical order (see table above).
    Vec context20() const {
        if (weather.size() != 7 || traffic.size() != 3 || temporal.size() != 6 || grid.size() != 4)
            throw ShapeError("context20: unexpected block sizes");
        Vec out;
        out.reserve(kContextFeatures);
        out.insert(out.end(), weather.begin(), weather.begin() + 4);
        out.insert(out.end(), traffic.begin(), traffic.end());
        out.insert(out.end(), temporal.begin(), temporal.begin() + 3);
        out.insert(out.end(), grid.begin(), grid.end());
        out.insert(out.end(), weather.begin() + 4, weather.end());
        out.insert(out.end(), temporal.begin() + 3, temporal.end());
        return out;
    }

    // The context features grouped into 6 semantic tokens, zero-padded to a
    // common width of 4: weather, traffic, pricing, grid, renewable, temporal.
    Matrix context_tokens() const {
        const Vec c = context20();
        Matrix tokens(6, 4);
        auto put = [&](int row, int offset, int count) {
            for (int i = 0; i < count; ++i) tokens(row, i) = c[offset + i];
        };
        put(0, 0, 4);    // weather
        put(1, 4, 3);    // traffic
        put(2, 7, 3);    // pricing
        put(3, 10, 4);   // grid
        put(4, 14, 3);   // renewable
        put(5, 17, 3);   // temporal
        return tokens;
    }

    // base = 8*E + 3*S is ambiguous on its own; producers stash the counts.
    int n_evs = 0;
    int n_stations = 0;

    double ev_soc(int i) const { return base[static_cast<std::size_t>(i) * kEvFeatures + 0]; }
    double ev_required(int i) const { return base[static_cast<std::size_t>(i) * kEvFeatures + 1]; }
    double ev_x(int i) const { return base[static_cast<std::size_t>(i) * kEvFeatures + 5]; }
    double ev_y(int i) const { return base[static_cast<std::size_t>(i) * kEvFeatures + 6]; }
    double ev_class_code(int i) const { return base[static_cast<std::size_t>(i) * kEvFeatures + 7]; }

    // Station index the EV is plugged into, or -1.
    int ev_plugged_station(int i) const {
        const double code = base[static_cast<std::size_t>(i) * kEvFeatures + 4];
        if (code <= 0.0) return -1;
        return static_cast<int>(std::lround(code * (n_stations + 1))) - 1;
    }

    double station_free_frac(int s) const {
        return base[static_cast<std::size_t>(n_evs) * kEvFeatures + static_cast<std::size_t>(s) * kStationFeatures + 0];
    }
    double station_queue_norm(int s) const {
        return base[static_cast<std::size_t>(n_evs) * kEvFeatures + static_cast<std::size_t>(s) * kStationFeatures + 1];
    }
    double station_price_norm(int s) const {
        return base[static_cast<std::size_t>(n_evs) * kEvFeatures + static_cast<std::size_t>(s) * kStationFeatures + 2];
    }

    bool operator==(const ContextState& o) const {
        return base == o.base && temporal == o.temporal && spatial == o.spatial && grid == o.grid &&
               weather == o.weather && traffic == o.traffic && t == o.t && n_evs == o.n_evs &&
               n_stations == o.n_stations;
    }
};

enum class ChargerTier { level2, dc_fast, high_power };

inline const char* tier_name(ChargerTier t) {
    switch (t) {
        case ChargerTier::level2: return "level2";
        case ChargerTier::dc_fast: return "dc_fast";
        case ChargerTier::high_power: return "high_power";
    }
    return "?";
}

// Static wiring of the charging infrastructure; fixed for a whole episode.
struct Topology {
    struct Station {
        double x_km = 0.0, y_km = 0.0;
        ChargerTier tier = ChargerTier::level2;
        int n_ports = 1;
        double power_kw = 7.0;  // per-port rating
        int transformer_id = 0;
    };
    struct Transformer {
        double capacity_kw = 150.0;
    };
    std::vector<Station> stations;
    std::vector<Transformer> transformers;
    double area_km = 10.0;
    double near_radius_km = 3.0;
};

// Five-way stakeholder weight vector, order: ev_users, grid, station,
// fleet, environment.
struct StakeholderWeights {
    std::array<double, 5> w{0.2, 0.2, 0.2, 0.2, 0.2};

    static StakeholderWeights defaults() { return {{0.25, 0.20, 0.20, 0.20, 0.15}}; }

    void validate() const {
        double sum = 0.0;
        for (double v : w) {
            if (v < 0.0) throw InvariantError("stakeholder weight negative");
            sum += v;
        }
        if (std::fabs(sum - 1.0) > 1e-9) throw InvariantError("stakeholder weights must sum to 1");
    }
};

inline double total_reward(const std::array<double, 5>& rewards, const StakeholderWeights& weights) {
    weights.validate();
    double total = 0.0;
    for (int i = 0; i < 5; ++i) total += weights.w[i] * rewards[i];
    return total;
}

}  // namespace camac

#endif
