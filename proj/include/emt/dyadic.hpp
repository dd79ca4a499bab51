#pragma once

// Smooth low-frequency cutoff, its dyadic pieces, and the telescoping
// identity for their fractional (positive-frequency) filters.

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "emt/frac.hpp"

namespace emt {

/// Raised when the sampling window is too short for the slowly decaying
/// tails of the filtered cutoff.
class GridTooSmall : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Even bump in frequency: 1 on |w| <= 1/(2 lambda), 0 for |w| >= 1/lambda,
/// with a C-infinity transition built from exp(-1/x).
struct Mollifier {
  double lambda = 1.0;
  bool enabled = true;  // false gives the zero function

  double eta(double w) const;
  /// theta(w) [eta(2^n w) - eta(2^{n+1} w)].
  double j(double w, int n) const;
};

/// Sampling window for the time-side functions: n points spaced
/// spacing_over_lambda * lambda, centred on s = 0.
struct DyadicGrid {
  std::size_t n = std::size_t{1} << 20;
  double spacing_over_lambda = 0.5;
};

/// Tail shared by eta^k_+ and every telescoping residual:
/// e^{-ik pi/2} Gamma(k+1) (i s)^{-k-1}.
cd filtered_cutoff_tail(double k, double s);

/// Samples of eta^k_+(s), the inverse transform of
/// e^{-ik pi/2} theta(w) w^k eta(w). The periodic images produced by the
/// discrete transform are subtracted using the exact tail, so the samples
/// approximate the function on the whole line. Throws GridTooSmall if the
/// edge samples have not reached the asymptotic tail.
Signal filtered_cutoff(const Mollifier& m, double k, const DyadicGrid& grid = {});

/// Samples of j^k_{n+}(s) for one dyadic piece (rapidly decaying, no
/// correction needed).
Signal filtered_piece(const Mollifier& m, double k, int n, const DyadicGrid& grid = {});

/// L1 norm on the line: trapezoid over the window plus the analytic
/// integral of |tail| outside it.
double l1_with_tail(const Signal& f, double k);

struct TelescopingRow {
  double k = 0.0;
  int N = 0;
  double ratio = 0.0;     // ||eta^k_+ - sum_{n<N} j^k_{n+}||_1 / ||eta^k_+||_1
  double expected = 0.0;  // 2^{-Nk}
  double tolerance = 1e-4;
  double rescale_error = 0.0;  // max |residual(s) - 2^{-N(k+1)} eta^k_+(2^{-N} s)| / max |residual|
  bool pass = false;
};

/// Builds eta^k_+ once and accumulates the pieces n = 0 .. n_max - 1,
/// reporting one row per N = 1 .. n_max.
std::vector<TelescopingRow> telescoping_sweep(const Mollifier& m, double k, int n_max, const DyadicGrid& grid = {},
                                              double tolerance = 1e-4);

TelescopingRow telescoping_check(const Mollifier& m, double k, int N, const DyadicGrid& grid = {},
                                 double tolerance = 1e-4);

/// ||eta^k_+||_1 with the tail correction.
double filtered_cutoff_l1(const Mollifier& m, double k, const DyadicGrid& grid = {});

/// sup_s |eta^k_+(s)| (lambda + |s|)^{1+k} over the window.
double eta_k_decay_fit(const Mollifier& m, double k, const DyadicGrid& grid = {});

struct DecayFitReport {
  std::vector<double> constants;  // one per grid, each twice as long as the previous
  double max_drift = 0.0;         // largest relative change between consecutive grids
  bool stable = false;            // max_drift < 0.1
};

/// Repeats the decay fit on `doublings` successively doubled windows.
DecayFitReport eta_k_decay_stability(const Mollifier& m, double k, int doublings, const DyadicGrid& grid = {});

}  // namespace emt
