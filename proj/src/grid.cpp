#include "ssd/grid.hpp"

namespace ssd {

std::vector<Vec> axis_grid(int d, double radius, int n) {
    if (d < 1 || n < 2 || !(radius > 0.0)) throw InvalidArgument("bad grid parameters");
    std::vector<Vec> out;
    out.push_back(Vec::Zero(d));
    for (int axis = 0; axis < d; ++axis)
        for (int i = 0; i < n; ++i) {
            const double t = -radius + 2.0 * radius * i / (n - 1);
            if (t == 0.0) continue;
            Vec z = Vec::Zero(d);
            z[axis] = t;
            out.push_back(z);
        }
    return out;
}

std::vector<Vec> axis_diagonal_grid(int d, double radius, int n) {
    auto out = axis_grid(d, radius, n);
    if (d != 2) return out;
    for (int sgn : {1, -1})
        for (int i = 0; i < n; ++i) {
            const double t = (-radius + 2.0 * radius * i / (n - 1)) / std::sqrt(2.0);
            if (t == 0.0) continue;
            Vec z(2);
            z << t, sgn * t;
            out.push_back(z);
        }
    return out;
}

}  // namespace ssd
