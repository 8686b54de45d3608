#pragma once

// Test-side decoder: recovers valence from a rendered frame by measuring the
// mouth-arc curvature, independently of the renderer internals.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "affectgan/image.hpp"
#include "affectgan/synth.hpp"

inline double measure_mouth_valence(const affectgan::Image& img, const affectgan::FaceLayout& g) {
    const int x0 = static_cast<int>(std::ceil(g.cx - g.mouth_half_width)) + 2;
    const int x1 = static_cast<int>(std::floor(g.cx + g.mouth_half_width)) - 2;
    const int band = static_cast<int>(g.mouth_depth + 4.0 * g.mouth_sigma) + 2;

    Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
    Eigen::Vector3d atb = Eigen::Vector3d::Zero();
    for (int x = x0; x <= x1; ++x) {
        double wsum = 0.0, ysum = 0.0;
        const int ylo = std::max(0, static_cast<int>(g.mouth_y) - band);
        const int yhi = std::min(img.height - 1, static_cast<int>(g.mouth_y) + band);
        for (int y = ylo; y <= yhi; ++y) {
            const double w = std::max(0.0, 0.40 - img.at(1, y, x));  // mouth is green-dark
            wsum += w;
            ysum += w * y;
        }
        if (wsum < 1e-6) continue;
        const double yc = ysum / wsum;
        const double u = x - g.cx;
        const Eigen::Vector3d row(1.0, u, u * u);
        ata += row * row.transpose();
        atb += row * yc;
    }
    const Eigen::Vector3d coef = ata.ldlt().solve(atb);
    return std::clamp(affectgan::valence_from_mouth_curvature(g, coef[2]), -1.5, 1.5);
}
