#include "chemokin/signal_history.hpp"

#include <algorithm>
#include <cmath>

#include "chemokin/error.hpp"

namespace chemokin {

SignalHistory::SignalHistory(const PhaseGrid& grid, std::vector<double> times, std::vector<std::vector<double>> frames)
    : dim_(grid.dim()),
      nodes_(grid.x_nodes()),
      dx_(grid.dx()),
      extent_(grid.x_extent()),
      topology_(grid.topology()),
      times_(std::move(times)),
      frames_(std::move(frames)) {
    if (times_.empty() || times_.size() != frames_.size())
        throw Error(ErrorKind::BadConfig, "signal history needs one frame per time");
    for (std::size_t k = 1; k < times_.size(); ++k)
        if (!(times_[k] > times_[k - 1])) throw Error(ErrorKind::BadConfig, "signal history times must increase");
    for (const auto& f : frames_) {
        if (f.size() != grid.x_cells()) throw Error(ErrorKind::BadConfig, "signal frame size mismatch");
        for (double v : f)
            if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteInput, "signal history is not finite");
    }
}

SignalHistory SignalHistory::constant(const PhaseGrid& grid, std::vector<double> frame) {
    return SignalHistory(grid, {0.0}, {std::move(frame)});
}

double SignalHistory::spatial(const std::vector<double>& frame, const std::array<double, 2>& x) const {
    // Continuous index relative to cell centers.
    auto locate = [&](double xi, int& i0, int& i1, double& w) {
        const double u = (xi + 0.5 * extent_) / dx_ - 0.5;
        const double fl = std::floor(u);
        w = u - fl;
        i0 = static_cast<int>(fl);
        i1 = i0 + 1;
        if (topology_ == Topology::Periodic) {
            i0 = ((i0 % nodes_) + nodes_) % nodes_;
            i1 = ((i1 % nodes_) + nodes_) % nodes_;
        } else {
            i0 = std::clamp(i0, 0, nodes_ - 1);
            i1 = std::clamp(i1, 0, nodes_ - 1);
        }
    };
    int a0, a1;
    double wa;
    locate(x[0], a0, a1, wa);
    if (dim_ == 1)
        return (1.0 - wa) * frame[static_cast<std::size_t>(a0)] + wa * frame[static_cast<std::size_t>(a1)];
    int b0, b1;
    double wb;
    locate(x[1], b0, b1, wb);
    auto at = [&](int a, int b) {
        return frame[static_cast<std::size_t>(a) * static_cast<std::size_t>(nodes_) + static_cast<std::size_t>(b)];
    };
    return (1.0 - wa) * ((1.0 - wb) * at(a0, b0) + wb * at(a0, b1)) + wa * ((1.0 - wb) * at(a1, b0) + wb * at(a1, b1));
}

double SignalHistory::operator()(const std::array<double, 2>& x, double s) const {
    if (times_.size() == 1 || s <= times_.front()) return spatial(frames_.front(), x);
    if (s >= times_.back()) return spatial(frames_.back(), x);
    const auto it = std::upper_bound(times_.begin(), times_.end(), s);
    const auto k = static_cast<std::size_t>(it - times_.begin());
    const double w = (s - times_[k - 1]) / (times_[k] - times_[k - 1]);
    return (1.0 - w) * spatial(frames_[k - 1], x) + w * spatial(frames_[k], x);
}

std::vector<double> SignalHistory::frame_at(double s) const {
    if (times_.size() == 1 || s <= times_.front()) return frames_.front();
    if (s >= times_.back()) return frames_.back();
    const auto it = std::upper_bound(times_.begin(), times_.end(), s);
    const auto k = static_cast<std::size_t>(it - times_.begin());
    const double w = (s - times_[k - 1]) / (times_[k] - times_[k - 1]);
    std::vector<double> out(frames_[k].size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - w) * frames_[k - 1][i] + w * frames_[k][i];
    return out;
}

}  // namespace chemokin
