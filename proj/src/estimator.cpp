#include "fmchan/estimator.hpp"

#include <cmath>

#include "fmchan/linalg.hpp"

namespace fmchan {

void EstimatorConfig::validate() const {
    if (iterations < 1) throw DomainError("estimator config: iterations must be >= 1");
    if (m_samples < 1) throw DomainError("estimator config: m_samples must be >= 1");
    if (!(gamma_c > 0.0)) throw DomainError("estimator config: gamma_c must be > 0");
    if (fixed_gamma < 0.0) throw DomainError("estimator config: fixed_gamma must be >= 0");
}

void PilotObservation::validate() const {
    if (y.rows() < 1 || p.rows() < 1) throw StructuralError("observation: empty matrices");
    if (y.cols() != p.cols())
        throw StructuralError("observation: Y has " + std::to_string(y.cols()) +
                              " pilot columns but P has " + std::to_string(p.cols()));
    if (!(sigma2 > 0.0)) throw DomainError("observation: sigma2 must be > 0");
}

PilotObservation simulate_observation(const ComplexMatrix& h, const ComplexMatrix& p,
                                      double snr_db, Rng noise_rng) {
    if (h.cols() != p.rows())
        throw StructuralError("simulate_observation: H columns (" + std::to_string(h.cols()) +
                              ") must match pilot rows (" + std::to_string(p.rows()) + ")");
    PilotObservation obs;
    obs.sigma2 = p.rows() / std::pow(10.0, snr_db / 10.0);
    obs.snr_db = snr_db;
    obs.alpha = static_cast<double>(p.cols()) / p.rows();
    obs.p = p;
    obs.y = linalg::matmul(h, p);
    obs.y += draw_complex_gaussian_matrix(noise_rng, h.rows(), p.cols(), obs.sigma2);
    return obs;
}

RealTensor3 denoise(const VelocityFn& velocity, const RealTensor3& x, double t) {
    if (!(t >= 0.0 && t < 1.0))
        throw DomainError("denoise: t must be in [0,1); the endpoint extrapolation degenerates"
                          " at t = 1");
    RealTensor3 v = velocity(x, t);
    if (!v.same_shape(x)) throw StructuralError("denoise: velocity output shape disagrees");
    RealTensor3 out(x.rows(), x.cols());
    const double u = 1.0 - t;
    const double* xp = x.data();
    const double* vp = v.data();
    double* op = out.data();
    for (std::size_t i = 0; i < out.size(); ++i) op[i] = xp[i] + u * vp[i];
    return out;
}

RealTensor3 denoise(const VelocityNet& net, const RealTensor3& x, double t) {
    return denoise(as_velocity(net), x, t);
}

ComplexMatrix fidelity_step(const ComplexMatrix& h_k, const PilotObservation& obs,
                            double gamma_k) {
    obs.validate();
    if (h_k.rows() != obs.n_r() || h_k.cols() != obs.n_t())
        throw StructuralError("fidelity_step: iterate shape disagrees with observation");
    if (!(gamma_k > 0.0)) throw DomainError("fidelity_step: gamma must be > 0");
    // H + gamma * (Y - H P) P^H / sigma^2
    ComplexMatrix residual = obs.y - linalg::matmul(h_k, obs.p);
    ComplexMatrix update = linalg::matmul_abh(residual, obs.p);
    update *= cplx(gamma_k / obs.sigma2, 0.0);
    return h_k + update;
}

RealTensor3 renoise(const ComplexMatrix& z, double t, Rng& rng, bool paper_literal_noise) {
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("renoise: t must be in [0,1]");
    const double eps_var = paper_literal_noise ? 1.0 : 2.0;
    ComplexMatrix eps = draw_complex_gaussian_matrix(rng, z.rows(), z.cols(), eps_var);
    eps *= cplx(1.0 - t, 0.0);
    ComplexMatrix mix = z;
    mix *= cplx(t, 0.0);
    mix += eps;
    return stack(mix);
}

ComplexMatrix estimate(const VelocityFn& velocity, const PilotObservation& obs,
                       const EstimatorConfig& config, const Rng& rng) {
    config.validate();
    obs.validate();

    Rng init_rng = rng.fork(Stream::EstimatorInit);
    Rng renoise_rng = rng.fork(Stream::EstimatorRenoise);

    const int k_max = config.iterations;
    const double gamma = config.fixed_gamma > 0.0
                             ? config.fixed_gamma
                             : config.gamma_c * obs.sigma2 / obs.n_p();

    ComplexMatrix h = draw_complex_gaussian_matrix(init_rng, obs.n_r(), obs.n_t(), 1.0);
    for (int k = 0; k < k_max; ++k) {
        const double t = static_cast<double>(k) / k_max;
        ComplexMatrix z = fidelity_step(h, obs, gamma);
        const RealTensor3 x = renoise(z, t, renoise_rng, config.paper_literal_noise);
        h = unstack(denoise(velocity, x, t));
        if (!h.all_finite())
            throw SolverError("estimate: non-finite iterate", k);
    }
    return h;
}

ComplexMatrix estimate(const VelocityNet& net, const PilotObservation& obs,
                       const EstimatorConfig& config, const Rng& rng) {
    if (net.arch().rows != obs.n_r() || net.arch().cols != obs.n_t())
        throw StructuralError("estimate: checkpoint expects " +
                              std::to_string(net.arch().rows) + "x" +
                              std::to_string(net.arch().cols) + " but observation implies " +
                              std::to_string(obs.n_r()) + "x" + std::to_string(obs.n_t()));
    return estimate(as_velocity(net), obs, config, rng);
}

ComplexMatrix estimate_mmse(const VelocityNet& net, const PilotObservation& obs,
                            const EstimatorConfig& config, const Rng& rng) {
    config.validate();
    ComplexMatrix sum(obs.n_r(), obs.n_t());
    for (int m = 0; m < config.m_samples; ++m) sum += estimate(net, obs, config, rng.fork(m));
    sum *= cplx(1.0 / config.m_samples, 0.0);
    return sum;
}

ComplexMatrix estimate_ls(const PilotObservation& obs) {
    obs.validate();
    const ComplexMatrix gram = linalg::matmul_abh(obs.p, obs.p); // P P^H, N_t x N_t
    const ComplexMatrix ginv = linalg::pinv_hermitian(gram, 1e-10);
    return linalg::matmul(linalg::matmul_abh(obs.y, obs.p), ginv);
}

ComplexMatrix channel_covariance(const ChannelDataset& train_dataset) {
    if (train_dataset.samples.empty()) throw DomainError("channel_covariance: empty dataset");
    const int n_r = train_dataset.geometry.n_r;
    const int n_t = train_dataset.geometry.n_t;
    const long dim = static_cast<long>(n_r) * n_t;
    if (dim > 4096)
        throw CapabilityError("channel_covariance: vectorized dimension " + std::to_string(dim) +
                              " exceeds the dense-solve guard of 4096; use smaller apertures");
    ComplexMatrix c(static_cast<int>(dim), static_cast<int>(dim));
    std::vector<cplx> h(dim);
    for (const ComplexMatrix& s : train_dataset.samples) {
        // vec() is column-major: entry (i,j) lands at i + n_r*j.
        for (int j = 0; j < n_t; ++j)
            for (int i = 0; i < n_r; ++i) h[i + static_cast<std::size_t>(n_r) * j] = s.at(i, j);
        for (long a = 0; a < dim; ++a) {
            const cplx ha = h[a];
            for (long b = 0; b < dim; ++b) c.at(a, b) += ha * std::conj(h[b]);
        }
    }
    c *= cplx(1.0 / static_cast<double>(train_dataset.samples.size()), 0.0);
    return c;
}

ComplexMatrix estimate_lmmse(const PilotObservation& obs, const ComplexMatrix& covariance) {
    obs.validate();
    const int n_r = obs.n_r();
    const int n_t = obs.n_t();
    const int n_p = obs.n_p();
    const long dim = static_cast<long>(n_r) * n_t;
    if (dim > 4096)
        throw CapabilityError("estimate_lmmse: vectorized dimension " + std::to_string(dim) +
                              " exceeds the dense-solve guard of 4096; use smaller apertures");
    if (covariance.rows() != dim || covariance.cols() != dim)
        throw StructuralError("estimate_lmmse: covariance must be " + std::to_string(dim) +
                              " square");

    // vec(Y) = A vec(H) with A = P^T (x) I_{N_r}.
    const long mdim = static_cast<long>(n_r) * n_p;
    ComplexMatrix a(static_cast<int>(mdim), static_cast<int>(dim));
    for (int q = 0; q < n_p; ++q)
        for (int j = 0; j < n_t; ++j)
            for (int i = 0; i < n_r; ++i)
                a.at(i + n_r * q, i + n_r * j) = obs.p.at(j, q);

    const ComplexMatrix ah = linalg::adjoint(a);
    const ComplexMatrix ca = linalg::matmul(covariance, ah);      // C A^H
    ComplexMatrix gram = linalg::matmul(a, ca);                   // A C A^H
    for (long i = 0; i < mdim; ++i) gram.at(i, i) += obs.sigma2;

    ComplexMatrix yvec(static_cast<int>(mdim), 1);
    for (int q = 0; q < n_p; ++q)
        for (int i = 0; i < n_r; ++i) yvec.at(i + n_r * q, 0) = obs.y.at(i, q);

    const ComplexMatrix solved = linalg::cholesky_solve(gram, yvec);
    const ComplexMatrix hvec = linalg::matmul(ca, solved);

    ComplexMatrix h(n_r, n_t);
    for (int j = 0; j < n_t; ++j)
        for (int i = 0; i < n_r; ++i) h.at(i, j) = hvec.at(i + n_r * j, 0);
    return h;
}

ComplexMatrix estimate_lmmse(const PilotObservation& obs, const ChannelDataset& train_dataset) {
    return estimate_lmmse(obs, channel_covariance(train_dataset));
}

} // namespace fmchan
