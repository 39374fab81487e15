#pragma once

#include "recsharpe/calibration.hpp"
#include "recsharpe/synthetic.hpp"

namespace recsharpe::testing {

// Cheap table on a reduced grid; the simplified-curve coverage rules are
// relaxed so that both record methods are available.
inline const CalibrationTable& small_table() {
    static const CalibrationTable table = [] {
        SurfaceGrid grid = desk_scale_grid();
        grid.n = {20, 50, 100};
        const Surface surface = mean_r0_surface(grid, 400, 60, 2024);
        TableBuildOptions options;
        options.curve.min_n = 20;
        options.curve.min_fits = 5;
        options.curve.max_first_r = 1.0;
        options.curve.min_last_r = 0.0;
        options.curve.max_gap = 1.0;
        return CalibrationTable::build(surface, options, "2024-01-01T00:00:00Z");
    }();
    return table;
}

} // namespace recsharpe::testing
