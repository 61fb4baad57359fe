#pragma once

#include <array>
#include <vector>

#include "chemokin/grid.hpp"

namespace chemokin {

/// A prescribed signal S(x, s): frames sampled at the spatial cell centers of
/// a grid at increasing times, interpolated linearly in time and
/// (bi)linearly in space. Used to freeze the coupling for linear problems.
class SignalHistory {
public:
    SignalHistory(const PhaseGrid& grid, std::vector<double> times, std::vector<std::vector<double>> frames);

    /// Time-independent history.
    static SignalHistory constant(const PhaseGrid& grid, std::vector<double> frame);

    double operator()(const std::array<double, 2>& x, double s) const;
    double operator()(double x, double s) const { return (*this)({x, 0.0}, s); }

    /// Values at every spatial cell center at time s.
    std::vector<double> frame_at(double s) const;

    bool is_constant() const { return times_.size() == 1; }

private:
    double spatial(const std::vector<double>& frame, const std::array<double, 2>& x) const;

    int dim_;
    int nodes_;
    double dx_;
    double extent_;
    Topology topology_;
    std::vector<double> times_;
    std::vector<std::vector<double>> frames_;
};

}  // namespace chemokin
