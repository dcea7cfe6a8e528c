#pragma once

#include <cmath>

namespace nlx {

// Neumaier variant of compensated summation: tracks a running correction so that
// adding ~1e9 terms keeps the result faithful to the mathematically exact sum.
struct neumaier {
    double sum = 0.0;
    double corr = 0.0;

    void add(double x) {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            corr += (sum - t) + x;
        else
            corr += (x - t) + sum;
        sum = t;
    }

    // Merging another accumulator preserves determinism when done in a fixed order.
    void merge(const neumaier& o) {
        add(o.sum);
        add(o.corr);
    }

    double value() const { return sum + corr; }
};

}  // namespace nlx
