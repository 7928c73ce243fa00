#pragma once

#include "atsc/sim.hpp"

#include <utility>
#include <vector>

namespace atsc {

struct EmissionParams {
    double vehicle_mass = 1500.0;   // kg
    double load_mass = 0.0;         // kg
    double rotating_mass = 0.0;     // kg, rotational inertia surrogate
    double rolling_resistance = 0.012;
    double air_density = 1.2;       // kg/m^3
    double drag_coefficient = 0.35;
    double frontal_area = 2.2;      // m^2
    double gradient = 0.0;          // slope
    double gearbox_efficiency = 0.9;
    double gravity = 9.81;

    void validate() const; // throws ConfigError
};

struct PowerBreakdown {
    double roll = 0.0;
    double air = 0.0;
    double accel = 0.0;
    double grade = 0.0;
    double total() const { return roll + air + accel + grade; }
};

// Emission-over-power curve: engine kW -> CO2 g/h, linear between breakpoints,
// clamped at the last one. Zero engine power emits the idle rate.
class CepCurve {
public:
    CepCurve(double idle_g_per_h, std::vector<std::pair<double, double>> breakpoints_kw_g_per_h);

    static CepCurve passenger_car_default();

    double idle_g_per_h() const { return idle_; }
    const std::vector<std::pair<double, double>> &breakpoints() const { return points_; }

    double rate_g_per_h(double engine_kw) const;

private:
    double idle_;
    std::vector<std::pair<double, double>> points_;
};

PowerBreakdown wheel_power_components(double speed, double accel, const EmissionParams &p);
double wheel_power(double speed, double accel, const EmissionParams &p);

// Tractive demand through the gearbox; braking and coasting demand nothing.
double engine_power(double wheel_watts, double efficiency);

double co2_rate(double engine_watts, const CepCurve &curve); // g/s

// Per-vehicle rate chain from kinematics.
double vehicle_co2_rate(double speed, double accel, const EmissionParams &p, const CepCurve &curve);

struct EmissionLedger {
    double pe_total = 0.0; // grams
    std::vector<double> history; // grams emitted per step
};

EmissionLedger accumulate_emissions(EmissionLedger ledger, const TrafficSnapshot &snapshot,
                                    const EmissionParams &params, const CepCurve &curve, double dt = 1.0);

} // namespace atsc
