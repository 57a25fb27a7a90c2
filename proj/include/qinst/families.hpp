#pragma once

#include <optional>
#include <vector>

#include "qinst/instruments.hpp"

namespace qinst {

/// Parameters of the instrument rho -> tr(rho A_x) alpha_x.
struct HolevoSpec {
  Observable observable;      // A on the input space
  std::vector<State> states;  // alpha_x on the output space, one per label of A

  void validate(const Tolerances& tol = {}) const;
};

/// Holevo bi-instrument rho -> tr(rho A_xy) alpha_xy. An absent state marks a
/// grid entry whose effect vanishes, so its operation is zero.
struct HolevoBiSpec {
  BiObservable observable;
  std::vector<std::optional<State>> states;  // row-major like the grid
  Index dim_out = 0;
};

/// One Kraus operator per outcome.
struct KrausSpec {
  Labels labels;
  std::vector<Matrix> ops;  // dim_out x dim_in

  void validate(const Tolerances& tol = {}) const;
};

/// Realised with Kraus operators sqrt(a_k p_m) |v_m><u_k| from the spectral
/// decompositions A_x = sum a_k |u_k><u_k| and alpha_x = sum p_m |v_m><v_m|.
Instrument holevo(const HolevoSpec& spec, const Tolerances& tol = {});
BiInstrument holevo(const HolevoBiSpec& spec, const Tolerances& tol = {});

/// The single operation rho -> tr(rho a) sigma for PSD a and sigma.
Operation holevo_operation(const Matrix& a, const Matrix& sigma, const Tolerances& tol = {});

Instrument kraus_instrument(const KrausSpec& spec, const Tolerances& tol = {});

/// Kraus operators A_x^{1/2}.
Instrument lueders(const Observable& a, const Tolerances& tol = {});

/// Constant-output instrument rho -> beta_y. The betas are PSD and sum to a
/// state; a zero beta gives a zero operation.
Instrument trivial(Index dim_in, Labels labels, const std::vector<Matrix>& betas, const Tolerances& tol = {});

/// H^(A,alpha) o H^(B,beta) = H^(C,beta) with C_xy = tr(alpha_x B_y) A_x.
HolevoBiSpec holevo_compose_closed_form(const HolevoSpec& first, const HolevoSpec& second, const Tolerances& tol = {});

/// K o H^(A,alpha) = H^(B,alpha) with B_xy = K_x^*(A_y).
HolevoBiSpec arbitrary_then_holevo(const Instrument& k, const HolevoSpec& h, const Tolerances& tol = {});

/// H^(A,alpha) o K = H^(B,beta) with B_xy = tr[K_y(alpha_x)] A_x and
/// beta_xy = K_y(alpha_x) / tr[K_y(alpha_x)]; beta_xy is absent when that
/// trace is at most tol.trace.
HolevoBiSpec holevo_then_arbitrary(const HolevoSpec& h, const Instrument& k, const Tolerances& tol = {});

/// Mixture of Holevo instruments that share their states: observable sum_i w_i A_i.
HolevoSpec convex_holevo(const std::vector<HolevoSpec>& specs, const std::vector<double>& weights,
                         const Tolerances& tol = {});

/// Output states of a mixture of Holevo instruments with different states,
/// beta_x = sum_i w_i tr(A_ix) alpha_ix / sum_i w_i tr(A_ix). Only meaningful
/// when the mixture is Holevo; absent where the denominator vanishes.
std::vector<std::optional<State>> mixture_holevo_states(const std::vector<HolevoSpec>& specs,
                                                        const std::vector<double>& weights,
                                                        const Tolerances& tol = {});

/// Max over outcomes and matrix units E_jk of |I_x(E_jk) - tr(E_jk A_x) alpha_x|
/// with A and alpha taken as in detect_holevo; zero exactly for Holevo instruments.
double holevo_defect(const Instrument& i, const Tolerances& tol = {});

/// Largest Choi eigenvalue below the top one, over outcomes; zero exactly for
/// Kraus instruments.
double kraus_defect(const Instrument& i, const Tolerances& tol = {});

/// Recovers (A, alpha) if every outcome acts as rho -> tr(rho A_x) alpha_x on
/// all matrix units. Outcomes with A_x = 0 get the maximally mixed state.
std::optional<HolevoSpec> detect_holevo(const Instrument& i, const Tolerances& tol = {});

/// Recovers one Kraus operator per outcome if every Choi matrix has rank one.
std::optional<KrausSpec> detect_kraus(const Instrument& i, const Tolerances& tol = {});

/// K_xy(rho) = lambda_y I_x(rho) (x) beta_y + mu_x alpha_x (x) J_y(rho).
BiInstrument convex_tensor_product(const Instrument& i, const Instrument& j, const std::vector<State>& alphas,
                                   const std::vector<State>& betas, const std::vector<double>& lambda,
                                   const std::vector<double>& mu, const Tolerances& tol = {});

}  // namespace qinst
