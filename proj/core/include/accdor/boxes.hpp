#pragma once

#include "accdor/imaging.hpp"

#include <cstddef>
#include <cstdlib>

namespace accdor {

/// Fixed-size detection box centred on a component centroid.
struct CandidateBox {
    Point center;
    int height = 20;
    int width = 20;
    std::size_t component_area = 0;
    double score = 1.0;

    /// Inclusive half-width containment: |dr| <= floor(h/2) and |dc| <= floor(w/2).
    bool contains(Point p) const noexcept {
        return std::abs(p.row - center.row) <= height / 2 && std::abs(p.col - center.col) <= width / 2;
    }

    friend bool operator==(const CandidateBox&, const CandidateBox&) = default;
};

} // namespace accdor
