#pragma once

// Independent reference computations. Nothing here calls the evaluator; the
// sentence bodies are re-derived by hand in scalar arithmetic.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <vector>

namespace contmodel::oracle {

using cd = std::complex<double>;

/// min over t in [0, 1] of f(t) on a uniform grid.
inline double grid_min_1d(const std::function<double(double)>& f, double step) {
  double best = std::numeric_limits<double>::infinity();
  const long n = std::lround(1.0 / step);
  for (long i = 0; i <= n; ++i) best = std::min(best, f(double(i) / n));
  return best;
}

/// sigma.1 on C: commutators vanish, so the value is min_t (1 - t^2) + t.
inline double sigma1_on_C() { return grid_min_1d([](double t) { return (1 - t * t) + t; }, 1e-5); }

/// sigmaPrime.1 on C: min over |l| = r <= 1 of |r^3 - r| + |2r^2 - 1|.
inline double sigma_prime1_on_C() {
  return grid_min_1d([](double r) { return std::abs(r * r * r - r) + std::abs(2 * r * r - 1); }, 1e-5);
}

/// Points of the closed unit disk on a square grid with the given step.
inline std::vector<cd> disk_grid(double step) {
  std::vector<cd> pts;
  const long n = std::lround(1.0 / step);
  for (long i = -n; i <= n; ++i)
    for (long j = -n; j <= n; ++j) {
      const cd z(double(i) / n, double(j) / n);
      if (std::norm(z) <= 1.0 + 1e-12) pts.push_back(z);
    }
  return pts;
}

/// sup over the unit disk of f, grid step `step`.
inline double disk_sup(const std::function<double(cd)>& f, double step) {
  double best = -std::numeric_limits<double>::infinity();
  for (const cd z : disk_grid(step)) best = std::max(best, f(z));
  return best;
}

/// Projects a point of C^k onto the polydisk |z_i| <= 1.
inline void clip_polydisk(std::vector<cd>& z) {
  for (auto& c : z)
    if (std::abs(c) > 1) c /= std::abs(c);
}

/// sup over the polydisk (the D1 ball of C^k) of f: coarse grid in polar
/// coordinates followed by compass refinement of the best grid points down to
/// step 1e-4.
inline double polydisk_sup(int k, const std::function<double(const std::vector<cd>&)>& f, double coarse = 0.1) {
  std::vector<cd> pts;
  const int radii = std::max(2, int(std::lround(1.0 / coarse)));
  for (int r = 0; r <= radii; ++r) {
    const double rad = double(r) / radii;
    const int angles = r == 0 ? 1 : 16;
    for (int a = 0; a < angles; ++a) pts.push_back(std::polar(rad, 2 * M_PI * a / angles));
  }
  struct Cand {
    std::vector<cd> z;
    double v;
  };
  std::vector<Cand> cands;  // best eight, descending
  std::vector<std::size_t> idx(k, 0);
  while (true) {
    std::vector<cd> z(k);
    for (int i = 0; i < k; ++i) z[i] = pts[idx[i]];
    const double v = f(z);
    if (cands.size() < 8 || v > cands.back().v) {
      auto pos = std::find_if(cands.begin(), cands.end(), [v](const Cand& c) { return v > c.v; });
      cands.insert(pos, {z, v});
      if (cands.size() > 8) cands.pop_back();
    }
    int i = 0;
    while (i < k && ++idx[i] == pts.size()) idx[i++] = 0;
    if (i == k) break;
  }
  double best = cands.front().v;
  for (std::size_t c = 0; c < cands.size(); ++c) {
    auto z = cands[c].z;
    double v = cands[c].v;
    for (double h = coarse; h > 1e-4; h *= 0.5) {
      bool moved = true;
      while (moved) {
        moved = false;
        for (int i = 0; i < k; ++i)
          for (const cd d : {cd(h, 0), cd(-h, 0), cd(0, h), cd(0, -h)}) {
            auto t = z;
            t[i] += d;
            clip_polydisk(t);
            const double tv = f(t);
            if (tv > v) {
              z = t;
              v = tv;
              moved = true;
            }
          }
      }
    }
    best = std::max(best, v);
  }
  return best;
}

/// psi on the Euclidean plane: rotation invariance fixes x = (r, 0); y ranges
/// over the disk grid; the best grid pair is refined by compass search.
inline double psi_euclidean_plane(double step = 1e-2) {
  auto body = [](double r, double a, double b) {
    const double nx = std::abs(r), ny = std::hypot(a, b);
    const double np = std::hypot((r + a) / 2, b / 2), nm = std::hypot((r - a) / 2, -b / 2);
    return std::abs(nx - 1) + std::abs(ny - 1) + std::abs(np - 1) + std::abs(nm - 1);
  };
  double best = std::numeric_limits<double>::infinity();
  double br = 0, ba = 0, bb = 0;
  const long n = std::lround(1.0 / step);
  for (long i = 0; i <= n; ++i) {
    const double r = double(i) / n;
    for (const cd y : disk_grid(step)) {
      const double v = body(r, y.real(), y.imag());
      if (v < best) {
        best = v;
        br = r;
        ba = y.real();
        bb = y.imag();
      }
    }
  }
  for (double h = step; h > 1e-7; h *= 0.5) {
    bool moved = true;
    while (moved) {
      moved = false;
      const double cand[6][3] = {{h, 0, 0}, {-h, 0, 0}, {0, h, 0}, {0, -h, 0}, {0, 0, h}, {0, 0, -h}};
      for (const auto& d : cand) {
        const double r = std::clamp(br + d[0], 0.0, 1.0);
        double a = ba + d[1], b = bb + d[2];
        const double ny = std::hypot(a, b);
        if (ny > 1) {
          a /= ny;
          b /= ny;
        }
        const double v = body(r, a, b);
        if (v < best) {
          best = v;
          br = r;
          ba = a;
          bb = b;
          moved = true;
        }
      }
    }
  }
  return best;
}

/// min over theta and |z| <= 1 of |w1 e^{i theta} + w2 z| (b-value of C + M_2
/// style two-summand models where the second summand contributes a disk).
inline double two_summand_b(double w1, double w2) {
  double best = std::numeric_limits<double>::infinity();
  for (const cd z : disk_grid(2e-3)) best = std::min(best, std::abs(w1 + w2 * z));  // theta = 0 by rotation
  return best;
}

/// Universal-panel values on C^k (equal weights) for real self-adjoint
/// candidates; commutator probes vanish in commutative algebras.
struct CommutativePanel {
  double comm_sup = 0.0;
  double proj_third = 0.0;
  double moment_nil = 0.0;
  double moment_selfcomm = 0.0;
};

inline CommutativePanel commutative_panel(int k) {
  const double w = 1.0 / k;
  CommutativePanel out;
  out.proj_third = std::max(0.0, polydisk_sup(k, [&](const std::vector<cd>& p) {
    double herm = 0, idem = 0;
    cd tr = 0;
    for (const cd c : p) {
      herm += w * std::norm(c - std::conj(c));
      idem += w * std::norm(c * c - c);
      tr += w * c;
    }
    return 1.0 / 3 - (std::sqrt(herm) + std::sqrt(idem) + std::abs(tr - 1.0 / 3));
  }));
  out.moment_nil = std::max(0.0, polydisk_sup(k, [&](const std::vector<cd>& x) {
    double n2 = 0, n4 = 0;
    for (const cd c : x) {
      n2 += w * std::norm(c);
      n4 += w * std::norm(c * c);
    }
    return std::sqrt(n2) - 2 * std::sqrt(n4);
  }));
  return out;
}

}  // namespace contmodel::oracle
