#include "cutstefan/quadrature.hpp"

#include <array>
#include <cmath>
#include <string>

namespace cutstefan {
namespace {

constexpr std::array<TriangleQp, 1> kCentroid{{{1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0}}};

constexpr std::array<TriangleQp, 3> kDeg2{{
    {2.0 / 3, 1.0 / 6, 1.0 / 6, 1.0 / 3},
    {1.0 / 6, 2.0 / 3, 1.0 / 6, 1.0 / 3},
    {1.0 / 6, 1.0 / 6, 2.0 / 3, 1.0 / 3},
}};

// Strang-Fix / Dunavant 6-point, degree 4.
constexpr double kA4 = 0.445948490915965;
constexpr double kB4 = 0.091576213509771;
constexpr double kWA4 = 0.223381589678011;
constexpr double kWB4 = 0.109951743655322;
constexpr std::array<TriangleQp, 6> kDeg4{{
    {1 - 2 * kA4, kA4, kA4, kWA4},
    {kA4, 1 - 2 * kA4, kA4, kWA4},
    {kA4, kA4, 1 - 2 * kA4, kWA4},
    {1 - 2 * kB4, kB4, kB4, kWB4},
    {kB4, 1 - 2 * kB4, kB4, kWB4},
    {kB4, kB4, 1 - 2 * kB4, kWB4},
}};

// Radon 7-point, degree 5.
constexpr double kA5 = 0.470142064105115;
constexpr double kB5 = 0.101286507323456;
constexpr double kWA5 = 0.132394152788506;
constexpr double kWB5 = 0.125939180544827;
constexpr std::array<TriangleQp, 7> kDeg5{{
    {1.0 / 3, 1.0 / 3, 1.0 / 3, 0.225},
    {1 - 2 * kA5, kA5, kA5, kWA5},
    {kA5, 1 - 2 * kA5, kA5, kWA5},
    {kA5, kA5, 1 - 2 * kA5, kWA5},
    {1 - 2 * kB5, kB5, kB5, kWB5},
    {kB5, 1 - 2 * kB5, kB5, kWB5},
    {kB5, kB5, 1 - 2 * kB5, kWB5},
}};

constexpr std::array<SegmentQp, 1> kGauss1{{{0.5, 1.0}}};
const double kG2 = 0.5 / std::sqrt(3.0);
const std::array<SegmentQp, 2> kGauss2{{{0.5 - kG2, 0.5}, {0.5 + kG2, 0.5}}};
const double kG3 = 0.5 * std::sqrt(0.6);
const std::array<SegmentQp, 3> kGauss3{{{0.5 - kG3, 5.0 / 18}, {0.5, 8.0 / 18}, {0.5 + kG3, 5.0 / 18}}};
const double kG4a = 0.5 * std::sqrt(3.0 / 7 - 2.0 / 7 * std::sqrt(1.2));
const double kG4b = 0.5 * std::sqrt(3.0 / 7 + 2.0 / 7 * std::sqrt(1.2));
const double kW4a = (18 + std::sqrt(30.0)) / 72;
const double kW4b = (18 - std::sqrt(30.0)) / 72;
const std::array<SegmentQp, 4> kGauss4{{{0.5 - kG4b, kW4b},
                                        {0.5 - kG4a, kW4a},
                                        {0.5 + kG4a, kW4a},
                                        {0.5 + kG4b, kW4b}}};

} // namespace

std::span<const TriangleQp> triangle_rule(int degree) {
  switch (degree) {
  case 0:
  case 1:
    return kCentroid;
  case 2:
    return kDeg2;
  case 3:
  case 4:
    return kDeg4;
  case 5:
    return kDeg5;
  default:
    throw Error("no triangle rule of degree " + std::to_string(degree));
  }
}

std::span<const SegmentQp> gauss_rule(int n_points) {
  switch (n_points) {
  case 1:
    return kGauss1;
  case 2:
    return kGauss2;
  case 3:
    return kGauss3;
  case 4:
    return kGauss4;
  default:
    throw Error("no Gauss rule with " + std::to_string(n_points) + " points");
  }
}

} // namespace cutstefan
