#pragma once

#include <random>
#include <string>

#include "switchcell/config.hpp"

// Shared test data: the bundled profile and random valid parameter sets.

namespace fixture {

inline std::string data(const std::string& rel) { return std::string(SWITCHCELL_SOURCE_DIR) + "/data/" + rel; }

inline switchcell::LoadedConfig nominal() { return switchcell::load_config(data("configs/dpt_25C.ini")); }

inline switchcell::DeviceSet profile() { return nominal().set; }

// Perturbs every electrical parameter of the bundled profile by up to +-spread,
// keeping the capacitances non-increasing with voltage.
inline switchcell::DeviceSet random_set(std::mt19937_64& rng, double spread = 0.3) {
    using namespace switchcell;
    std::uniform_real_distribution<double> u(1.0 - spread, 1.0 + spread);
    DeviceSet s = profile();
    auto& m = s.mosfet;
    m.v_th0 *= u(rng);
    m.k_fs *= u(rng);
    m.r_ds_on *= u(rng);
    m.c_gs *= u(rng);
    auto cap = [&](const PiecewiseCapacitance& c) {
        auto v = c.values();
        v[0] *= u(rng);
        for (std::size_t i = 1; i < v.size(); ++i) v[i] = std::min(v[i] * u(rng), v[i - 1]);
        return PiecewiseCapacitance::from_values(v, c.breakpoints(), c.v_max());
    };
    m.c_gd = cap(m.c_gd);
    m.c_ds = cap(m.c_ds);
    m.l_s *= u(rng);
    m.l_d *= u(rng);
    s.sbd.v_f0 *= u(rng);
    s.sbd.c_f = cap(s.sbd.c_f);
    s.drive.r_g_int *= u(rng);
    s.drive.r_g_ext *= u(rng);
    s.circuit.l_p *= u(rng);
    s.circuit.c_l *= u(rng);
    return s;
}

}  // namespace fixture
