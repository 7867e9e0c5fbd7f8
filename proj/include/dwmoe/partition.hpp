#pragma once

// Axis-aligned partition of the input space into 1, 2 or 4 regions. Each
// axis contributes one bit of the region index: bit b is set iff the point
// lies at or above the threshold on that axis (boundary values go up).

#include <algorithm>
#include <span>
#include <stdexcept>
#include <vector>

namespace dwmoe {

struct Axis {
    std::size_t feature = 0;
    double threshold = 0.0;

    friend bool operator==(const Axis&, const Axis&) = default;
};

class Partition {
public:
    Partition() = default;

    explicit Partition(std::vector<Axis> axes) : axes_(std::move(axes)) {
        if (axes_.size() > 2) throw std::invalid_argument("Partition: at most 2 axes");
        if (axes_.size() == 2 && axes_[0].feature == axes_[1].feature)
            throw std::invalid_argument("Partition: duplicate feature");
    }

    std::size_t region_count() const { return std::size_t{1} << axes_.size(); }

    std::size_t region_of(std::span<const double> x) const {
        std::size_t region = 0;
        for (std::size_t b = 0; b < axes_.size(); ++b) {
            if (axes_[b].feature >= x.size())
                throw std::out_of_range("Partition::region_of: feature index out of range");
            if (x[axes_[b].feature] >= axes_[b].threshold) region |= std::size_t{1} << b;
        }
        return region;
    }

    const std::vector<Axis>& axes() const { return axes_; }

    friend bool operator==(const Partition&, const Partition&) = default;

private:
    std::vector<Axis> axes_;
};

// Partition thresholds at the per-feature medians of the given points
// (mean of the two middle values for even counts). Points must be
// indexable by feature.
template <typename Points>
Partition from_medians(const Points& points, const std::vector<std::size_t>& features) {
    if (points.empty()) throw std::invalid_argument("from_medians: empty point set");
    std::vector<Axis> axes;
    axes.reserve(features.size());
    for (std::size_t f : features) {
        std::vector<double> vals;
        vals.reserve(points.size());
        for (const auto& p : points) vals.push_back(p[f]);
        std::sort(vals.begin(), vals.end());
        const std::size_t n = vals.size();
        const double median =
            n % 2 == 1 ? vals[n / 2] : 0.5 * (vals[n / 2 - 1] + vals[n / 2]);
        axes.push_back(Axis{f, median});
    }
    return Partition(std::move(axes));
}

// Partition thresholds at zero on the given features (increase/decrease
// quadrants).
inline Partition zero_line(const std::vector<std::size_t>& features) {
    std::vector<Axis> axes;
    axes.reserve(features.size());
    for (std::size_t f : features) axes.push_back(Axis{f, 0.0});
    return Partition(std::move(axes));
}

}  // namespace dwmoe
