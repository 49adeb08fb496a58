// Tracks the two loop troughs of the fig2 collision through time and prints
// their positions and depths, then the asymptotic single-mode depths.

#include <cstdio>

#include "dpsol/scenario.hpp"

int main()
{
    const auto config = dpsol::presets::fig2();
    const auto fields = dpsol::assemble_fields<double>(config.spec);

    std::printf("%6s  %10s %10s  %10s %10s\n", "t", "x_1", "u_1", "x_2", "u_2");
    for (double t = -12.0; t <= 12.0; t += 2.0) {
        const auto frame = dpsol::frame_features(fields, t);
        std::printf("%6.1f ", t);
        for (const auto& f : frame.troughs)
            std::printf(" %10.4f %10.6f", f.x, f.u);
        if (frame.troughs.size() < 2)
            std::printf("  (merged, %zu trough)", frame.troughs.size());
        std::printf("\n");
    }

    std::printf("\nisolated depths:");
    for (std::size_t j = 0; j < config.spec.size(); ++j)
        std::printf(" %.10f", dpsol::single_mode_extremum(config.spec, j));
    std::printf("\n");
}
