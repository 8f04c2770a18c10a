#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace oracle {

namespace {

Matrix inverse(const Matrix& a) { return a.partialPivLu().inverse(); }

double log_abs_det(const Matrix& a) {
  const Eigen::PartialPivLU<Matrix> lu(a);
  const Matrix& u = lu.matrixLU();
  double s = 0.0;
  for (Index i = 0; i < a.rows(); ++i) s += std::log(std::abs(u(i, i)));
  return s;
}

bool is_pd(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0) > 0.0;
}

double re_trace(const Matrix& a) { return a.trace().real(); }

Matrix from_theta(const RealVector& theta, const std::vector<Matrix>& basis) {
  Matrix x = Matrix::Zero(basis.front().rows(), basis.front().cols());
  for (std::size_t i = 0; i < basis.size(); ++i) x += theta(static_cast<Index>(i)) * basis[i];
  return x;
}

struct Lagrangian {
  const Matrix& g;
  double q;
  const Matrix& s;
  const std::vector<Matrix>& basis;

  double value(const Matrix& x, double nu) const {
    return re_trace(g * x) + q * re_trace(x * x) + nu * re_trace(inverse(x) * s);
  }
};

// Damped Newton on θ for fixed ν. θ must start at a PD point.
RealVector newton(const Lagrangian& lag, RealVector theta, double nu) {
  const auto k = static_cast<Index>(lag.basis.size());
  for (int it = 0; it < 200; ++it) {
    const Matrix x = from_theta(theta, lag.basis);
    const Matrix xi = inverse(x);
    const Matrix w = xi * lag.s * xi;
    RealVector grad(k);
    RealMatrix hess(k, k);
    std::vector<Matrix> xid(lag.basis.size());
    for (Index i = 0; i < k; ++i) xid[i] = xi * lag.basis[i];
    for (Index i = 0; i < k; ++i) {
      const Matrix& di = lag.basis[i];
      grad(i) = re_trace(lag.g * di) + 2.0 * lag.q * re_trace(x * di) - nu * re_trace(di * w);
      for (Index j = 0; j <= i; ++j) {
        const Matrix& dj = lag.basis[j];
        const double h = 2.0 * lag.q * re_trace(di * dj) + 2.0 * nu * re_trace(xid[i] * xid[j] * xi * lag.s);
        hess(i, j) = h;
        hess(j, i) = h;
      }
    }
    const RealVector step = hess.ldlt().solve(-grad);
    const double decrement = -grad.dot(step);
    const double f0 = lag.value(x, nu);
    if (decrement <= 1e-26 * (1.0 + std::abs(f0))) break;
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 80; ++ls, t *= 0.5) {
      const RealVector cand = theta + t * step;
      const Matrix xc = from_theta(cand, lag.basis);
      if (!is_pd(xc)) continue;
      if (lag.value(xc, nu) <= f0 - 0.25 * t * decrement) {
        theta = cand;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return theta;
}

}  // namespace

Matrix random_complex(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix a(rows, cols);
  for (Index k = 0; k < a.size(); ++k) a(k) = Complex(nd(rng), nd(rng));
  return a;
}

Matrix random_hermitian(Index m, Rng& rng) {
  const Matrix a = random_complex(m, m, rng);
  return 0.5 * (a + a.adjoint());
}

Matrix random_pd(Index m, Rng& rng) {
  const Matrix a = random_complex(m, m, rng);
  return a * a.adjoint() / static_cast<double>(m) + Matrix::Identity(m, m);
}

Matrix random_pd_toeplitz(Index m, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector row = Vector::Zero(m);
  for (int k = 0; k < 3; ++k) {
    const double w = 2.0 * std::numbers::pi * u(rng);
    const double p = 0.5 + 2.0 * u(rng);
    for (Index g = 0; g < m; ++g) row(g) += p * std::polar(1.0, -w * static_cast<double>(g));
  }
  row(0) += 0.5 + u(rng);
  return toeplitz(row);
}

Matrix toeplitz(const Vector& first_row) {
  const Index m = first_row.size();
  Matrix t(m, m);
  for (Index i = 0; i < m; ++i) {
    for (Index k = 0; k < m; ++k) {
      t(i, k) = k >= i ? first_row(k - i) : std::conj(first_row(i - k));
    }
  }
  for (Index i = 0; i < m; ++i) t(i, i) = t(i, i).real();
  return t;
}

Matrix toeplitz_from_theta(const RealVector& theta, Index m) {
  if (theta.size() != 2 * m - 1) throw std::invalid_argument("toeplitz_from_theta: bad length");
  Vector row(m);
  row(0) = theta(0);
  for (Index g = 1; g < m; ++g) row(g) = Complex(theta(g), theta(g + m - 1));
  return toeplitz(row);
}

RealVector theta_of_toeplitz(const Matrix& x) {
  const Index m = x.rows();
  RealVector theta(2 * m - 1);
  theta(0) = x(0, 0).real();
  for (Index g = 1; g < m; ++g) {
    theta(g) = x(0, g).real();
    theta(g + m - 1) = x(0, g).imag();
  }
  return theta;
}

std::vector<Matrix> toeplitz_theta_basis(Index m) {
  std::vector<Matrix> basis;
  for (Index i = 0; i < 2 * m - 1; ++i) basis.push_back(toeplitz_from_theta(RealVector::Unit(2 * m - 1, i), m));
  return basis;
}

double nll(const Matrix& r, const Matrix& scm) { return re_trace(inverse(r) * scm) + log_abs_det(r); }

Matrix toeplitz_surrogate_minimizer(const Matrix& g, double q, const Matrix& scm) {
  const Index m = g.rows();
  const auto basis = toeplitz_theta_basis(m);
  const Lagrangian lag{g, q, scm, basis};
  auto constraint = [&](const Matrix& x) { return re_trace(inverse(x) * scm); };

  if (q > 0.0) {
    // Unconstrained minimizer; returned when it is already feasible.
    const auto k = static_cast<Index>(basis.size());
    RealMatrix a(k, k);
    RealVector b(k);
    for (Index i = 0; i < k; ++i) {
      b(i) = -re_trace(g * basis[i]);
      for (Index j = 0; j < k; ++j) a(i, j) = 2.0 * q * re_trace(basis[i] * basis[j]);
    }
    const Matrix x0 = from_theta(a.ldlt().solve(b), basis);
    if (is_pd(x0) && constraint(x0) <= 1.0) return x0;
  }

  const double c = 2.0 * re_trace(scm) + 1e-12;
  RealVector theta = theta_of_toeplitz(c * Matrix::Identity(m, m));
  auto solve = [&](double nu) {
    theta = newton(lag, theta, nu);
    return constraint(from_theta(theta, basis));
  };

  double lo = 1.0;
  double hi = 1.0;
  if (solve(1.0) > 1.0) {
    while (solve(hi) > 1.0) hi *= 2.0;
    lo = hi / 2.0;
  } else {
    while (solve(lo) <= 1.0) lo /= 2.0;
    hi = lo * 2.0;
  }
  for (int it = 0; it < 200 && hi / lo > 1.0 + 1e-15; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (solve(mid) > 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  solve(hi);
  return from_theta(theta, basis);
}

double gridded_model_nll(const Matrix& scm, Index grid, int iterations) {
  const Index m = scm.rows();
  Matrix a(m, grid);
  for (Index k = 0; k < grid; ++k) {
    const double w = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(grid);
    for (Index i = 0; i < m; ++i) a(i, k) = std::polar(1.0, w * static_cast<double>(i));
  }
  RealVector p = RealVector::Constant(grid, re_trace(scm) / static_cast<double>(m * grid));
  auto model = [&] { return Matrix(a * p.cast<Complex>().asDiagonal() * a.adjoint()); };
  for (int it = 0; it < iterations; ++it) {
    const Matrix ri = inverse(model());
    const Matrix ria = ri * a;
    const Matrix num = ria.adjoint() * scm * ria;
    for (Index k = 0; k < grid; ++k) {
      const double den = (a.col(k).adjoint() * ria.col(k))(0).real();
      p(k) *= num(k, k).real() / den;
    }
  }
  return nll(model(), scm);
}

double lowrank_sigma_search(const RealVector& beta_desc, Index r) {
  const RealVector tail = beta_desc.tail(beta_desc.size() - r);
  auto cost = [&](double s) { return (tail.array() - s).square().sum(); };
  const double top = std::max(1.0, 1.5 * beta_desc.cwiseAbs().maxCoeff());
  const int points = 20001;
  const double h = top / (points - 1);
  double best = 0.0;
  double best_cost = cost(0.0);
  for (int i = 1; i < points; ++i) {
    const double s = h * i;
    if (cost(s) < best_cost) {
      best_cost = cost(s);
      best = s;
    }
  }
  double a = std::max(0.0, best - h);
  double b = best + h;
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 200; ++it) {
    const double c = b - phi * (b - a);
    const double d = a + phi * (b - a);
    if (cost(c) <= cost(d)) {
      b = d;
    } else {
      a = c;
    }
  }
  return 0.5 * (a + b);
}

double waterlevel_grid(const RealVector& gamma, double kappa, double h) {
  auto cost = [&](double u) {
    double s = 0.0;
    for (const double g : gamma) {
      const double d = std::clamp(g, u, kappa * u) - g;
      s += d * d;
    }
    return s;
  };
  const double top = std::max(gamma.maxCoeff(), 0.0);
  const auto steps = static_cast<long>(std::ceil(top / h));
  double best = 0.0;
  double best_cost = cost(0.0);
  for (long i = 1; i <= steps; ++i) {
    const double u = h * static_cast<double>(i);
    const double c = cost(u);
    if (c < best_cost - 1e-15) {
      best_cost = c;
      best = u;
    }
  }
  return best;
}

RealMatrix expected_nll_hessian(const Matrix& r0, double h) {
  const Index m = r0.rows();
  const RealVector t0 = theta_of_toeplitz(r0);
  const Index k = t0.size();
  auto f = [&](const RealVector& t) {
    const Matrix r = toeplitz_from_theta(t, m);
    return re_trace(inverse(r) * r0) + log_abs_det(r);
  };
  RealMatrix hess(k, k);
  for (Index i = 0; i < k; ++i) {
    for (Index j = 0; j < k; ++j) {
      RealVector pp = t0, pm = t0, mp = t0, mm = t0;
      pp(i) += h; pp(j) += h;
      pm(i) += h; pm(j) -= h;
      mp(i) -= h; mp(j) += h;
      mm(i) -= h; mm(j) -= h;
      hess(i, j) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h * h);
    }
  }
  return 0.5 * (hess + hess.transpose());
}

}  // namespace oracle
