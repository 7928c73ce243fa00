#include "atsc/emissions.hpp"

#include "atsc/errors.hpp"

#include <algorithm>
#include <cmath>

namespace atsc {

void EmissionParams::validate() const {
    if (!(vehicle_mass > 0.0))
        throw ConfigError("emissions.vehicle_mass: must be > 0");
    if (!(load_mass >= 0.0))
        throw ConfigError("emissions.load_mass: must be >= 0");
    if (!(rotating_mass >= 0.0))
        throw ConfigError("emissions.rotating_mass: must be >= 0");
    if (!(gearbox_efficiency > 0.0 && gearbox_efficiency <= 1.0))
        throw ConfigError("emissions.gearbox_efficiency: must lie in (0,1]");
    if (!(rolling_resistance > 0.0))
        throw ConfigError("emissions.rolling_resistance: must be > 0");
    if (!(air_density > 0.0))
        throw ConfigError("emissions.air_density: must be > 0");
    if (!(drag_coefficient > 0.0))
        throw ConfigError("emissions.drag_coefficient: must be > 0");
    if (!(frontal_area > 0.0))
        throw ConfigError("emissions.frontal_area: must be > 0");
}

CepCurve::CepCurve(double idle_g_per_h, std::vector<std::pair<double, double>> breakpoints)
    : idle_(idle_g_per_h), points_(std::move(breakpoints)) {
    if (!(idle_ >= 0.0))
        throw ConfigError("emissions.cep.idle: must be >= 0");
    if (points_.empty())
        throw ConfigError("emissions.cep.breakpoints: need at least one breakpoint");
    double prev_rate = idle_;
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (i > 0 && !(points_[i].first > points_[i - 1].first))
            throw ConfigError("emissions.cep.breakpoints: power must be strictly increasing");
        if (!(points_[i].first >= 0.0))
            throw ConfigError("emissions.cep.breakpoints: power must be >= 0");
        if (!(points_[i].second >= prev_rate))
            throw ConfigError("emissions.cep.breakpoints: rates must be non-negative and non-decreasing");
        prev_rate = points_[i].second;
    }
}

CepCurve CepCurve::passenger_car_default() {
    return CepCurve(1080.0, {{0.0, 1080.0}, {5.0, 3600.0}, {20.0, 9000.0}, {50.0, 18000.0}, {80.0, 27000.0}});
}

double CepCurve::rate_g_per_h(double engine_kw) const {
    if (engine_kw <= 0.0)
        return idle_;
    if (engine_kw <= points_.front().first) {
        // Between idle (0 kW) and the first breakpoint.
        double x1 = points_.front().first;
        return x1 > 0.0 ? idle_ + (points_.front().second - idle_) * engine_kw / x1 : points_.front().second;
    }
    if (engine_kw >= points_.back().first)
        return points_.back().second;
    auto upper = std::upper_bound(points_.begin(), points_.end(), engine_kw,
                                  [](double x, const auto &pt) { return x < pt.first; });
    auto lower = upper - 1;
    double frac = (engine_kw - lower->first) / (upper->first - lower->first);
    return lower->second + frac * (upper->second - lower->second);
}

PowerBreakdown wheel_power_components(double speed, double accel, const EmissionParams &p) {
    double mass = p.vehicle_mass + p.load_mass;
    PowerBreakdown out;
    out.roll = mass * p.gravity * p.rolling_resistance * speed;
    out.air = 0.5 * p.air_density * p.drag_coefficient * p.frontal_area * speed * speed * speed;
    out.accel = (mass + p.rotating_mass) * accel * speed;
    out.grade = mass * p.gravity * p.gradient * speed;
    return out;
}

double wheel_power(double speed, double accel, const EmissionParams &p) {
    return wheel_power_components(speed, accel, p).total();
}

double engine_power(double wheel_watts, double efficiency) {
    if (wheel_watts <= 0.0)
        return 0.0;
    return wheel_watts / efficiency;
}

double co2_rate(double engine_watts, const CepCurve &curve) {
    return curve.rate_g_per_h(engine_watts / 1000.0) / 3600.0;
}

double vehicle_co2_rate(double speed, double accel, const EmissionParams &p, const CepCurve &curve) {
    return co2_rate(engine_power(wheel_power(speed, accel, p), p.gearbox_efficiency), curve);
}

EmissionLedger accumulate_emissions(EmissionLedger ledger, const TrafficSnapshot &snapshot,
                                    const EmissionParams &params, const CepCurve &curve, double dt) {
    double step = 0.0;
    for (const auto &v : snapshot.vehicles)
        step += vehicle_co2_rate(v.speed, v.accel, params, curve) * dt;
    ledger.pe_total += step;
    ledger.history.push_back(step);
    return ledger;
}

} // namespace atsc
