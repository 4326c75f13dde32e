#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace fklab {

// Points and cell centers live in at most three dimensions; 2-D data keeps z = 0.
using Vec = std::array<double, 3>;

inline double sq(double x) { return x * x; }

inline double dist2(const Vec& a, const Vec& b) {
    return sq(a[0] - b[0]) + sq(a[1] - b[1]) + sq(a[2] - b[2]);
}

inline double dist(const Vec& a, const Vec& b) { return std::sqrt(dist2(a, b)); }

// Volume of the unit ball in dimension n.
inline double unit_ball_volume(int n) {
    switch (n) {
        case 1: return 2.0;
        case 2: return M_PI;
        case 3: return 4.0 * M_PI / 3.0;
        default: {
            // V_n = pi^(n/2) / Gamma(n/2 + 1)
            return std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
        }
    }
}

// Error raised by the certificate pipeline; carries the stage that failed so CLI
// output and test diagnostics can name it.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& what)
        : std::runtime_error("[stage=" + stage + "] " + what), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

}  // namespace fklab
