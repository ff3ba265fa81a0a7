#include "meanloop/systems.hpp"

#include <cmath>
#include <numbers>

#include "meanloop/errors.hpp"

namespace meanloop {

namespace {

constexpr double kPi = std::numbers::pi;

double get(const std::map<std::string, double>& params, const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

void reject_unknown(const std::map<std::string, double>& params,
                    std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : params) {
        (void)value;
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) throw InvalidArgumentError("unknown system parameter: " + key);
    }
}

/// Planar harmonic oscillator H = (q^2 + p^2)/2 as a scalar-Hamiltonian pair
/// (coupling function to be attached by the caller).
PairSpec harmonic_factor() {
    PairSpec p;
    p.m = 1;
    p.H_eval = [](const Eigen::VectorXd& x) {
        Eigen::VectorXd h(1);
        h(0) = 0.5 * x.squaredNorm();
        return h;
    };
    p.H_grad = [](const Eigen::VectorXd& x) {
        Eigen::MatrixXd g(1, 2);
        g.row(0) = x.transpose();
        return g;
    };
    p.H_hess = [](const Eigen::VectorXd&) {
        return std::vector<Eigen::MatrixXd>{Eigen::MatrixXd::Identity(2, 2)};
    };
    return p;
}

SystemSpec example1_linear(const std::map<std::string, double>& params) {
    reject_unknown(params, {"c"});
    const double c = get(params, "c", 1.0);
    SystemSpec sys;
    sys.name = "example1-linear";
    sys.params = {{"c", c}};
    sys.pair = harmonic_factor();
    sys.pair.f_eval = [c](const Eigen::VectorXd& v) { return c * v(0); };
    sys.pair.f_grad = [c](const Eigen::VectorXd&) {
        Eigen::VectorXd g(1);
        g(0) = c;
        return g;
    };
    sys.pair.f_hess = [](const Eigen::VectorXd&) { return Eigen::MatrixXd::Zero(1, 1); };
    sys.pair.in_W = [](const Eigen::VectorXd&) { return true; };
    sys.seed_point = [](int) { return Eigen::Vector2d(0.5, 0.0); };
    sys.seed_mean = [](int) {
        Eigen::VectorXd mu(1);
        mu(0) = 0.125;
        return mu;
    };
    return sys;
}

SystemSpec example2_harmonic(const std::map<std::string, double>& params) {
    reject_unknown(params, {});
    SystemSpec sys;
    sys.name = "example2-harmonic";
    sys.pair = harmonic_factor();
    sys.pair.f_eval = [](const Eigen::VectorXd& v) { return 0.5 * v(0) * v(0); };
    sys.pair.f_grad = [](const Eigen::VectorXd& v) { return v; };
    sys.pair.f_hess = [](const Eigen::VectorXd&) { return Eigen::MatrixXd::Identity(1, 1); };
    sys.pair.in_W = [](const Eigen::VectorXd&) { return true; };
    sys.seed_point = [](int k) { return Eigen::Vector2d(3.5 * std::sqrt(double(k)), 0.0); };
    sys.seed_mean = [](int k) {
        Eigen::VectorXd mu(1);
        mu(0) = 6.0 * k;
        return mu;
    };
    return sys;
}

SystemSpec example3_helium(const std::map<std::string, double>& params) {
    reject_unknown(params, {"mu"});
    const double mu = get(params, "mu", 2.0);
    if (mu <= 1.0) throw InvalidArgumentError("example3-helium: mu must be > 1");
    SystemSpec sys;
    sys.name = "example3-helium";
    sys.params = {{"mu", mu}};
    sys.solvable = false;  // collision orbits are out of scope

    PairSpec p;
    p.phase = PhaseSpace(2);
    p.m = 3;
    // Coordinates (q1, q2, p1, p2), q_i > 0.
    p.H_eval = [mu](const Eigen::VectorXd& x) {
        Eigen::VectorXd h(3);
        h(0) = 0.5 * (x(2) * x(2) + x(3) * x(3)) - mu / x(0) - mu / x(1);
        h(1) = x(0);
        h(2) = x(1);
        return h;
    };
    p.H_grad = [mu](const Eigen::VectorXd& x) {
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(3, 4);
        g(0, 0) = mu / (x(0) * x(0));
        g(0, 1) = mu / (x(1) * x(1));
        g(0, 2) = x(2);
        g(0, 3) = x(3);
        g(1, 0) = 1.0;
        g(2, 1) = 1.0;
        return g;
    };
    p.H_hess = [mu](const Eigen::VectorXd& x) {
        std::vector<Eigen::MatrixXd> hs(3, Eigen::MatrixXd::Zero(4, 4));
        hs[0](0, 0) = -2.0 * mu / (x(0) * x(0) * x(0));
        hs[0](1, 1) = -2.0 * mu / (x(1) * x(1) * x(1));
        hs[0](2, 2) = 1.0;
        hs[0](3, 3) = 1.0;
        return hs;
    };
    p.f_eval = [](const Eigen::VectorXd& v) { return v(0) + 1.0 / (v(2) - v(1)); };
    p.f_grad = [](const Eigen::VectorXd& v) {
        const double s = v(2) - v(1);
        Eigen::VectorXd g(3);
        g(0) = 1.0;
        g(1) = 1.0 / (s * s);
        g(2) = -1.0 / (s * s);
        return g;
    };
    p.f_hess = [](const Eigen::VectorXd& v) {
        const double s = v(2) - v(1);
        const double w = 2.0 / (s * s * s);
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3, 3);
        h(1, 1) = w;
        h(2, 2) = w;
        h(1, 2) = -w;
        h(2, 1) = -w;
        return h;
    };
    p.in_W = [](const Eigen::VectorXd& v) { return v(2) > v(1); };
    p.sample_scale = 0.3;
    p.sample_center = (Eigen::VectorXd(4) << 1.0, 2.0, 0.0, 0.0).finished();
    sys.pair = std::move(p);
    sys.seed_point = [](int) { return (Eigen::VectorXd(4) << 1.0, 2.0, 0.0, 0.0).finished(); };
    sys.seed_mean = [](int) { return (Eigen::VectorXd(3) << -1.0, 1.0, 2.0).finished(); };
    return sys;
}

SystemSpec example4_bov(const std::map<std::string, double>& params) {
    reject_unknown(params, {});
    SystemSpec sys;
    sys.name = "example4-bov";

    PairSpec p;
    p.phase = PhaseSpace(2);
    p.m = 2;
    // Coordinates (Re z, Im z, Re w, Im w); H = (|z|^2, |w|^2).
    p.H_eval = [](const Eigen::VectorXd& x) {
        Eigen::VectorXd h(2);
        h(0) = x(0) * x(0) + x(1) * x(1);
        h(1) = x(2) * x(2) + x(3) * x(3);
        return h;
    };
    p.H_grad = [](const Eigen::VectorXd& x) {
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2, 4);
        g(0, 0) = 2.0 * x(0);
        g(0, 1) = 2.0 * x(1);
        g(1, 2) = 2.0 * x(2);
        g(1, 3) = 2.0 * x(3);
        return g;
    };
    p.H_hess = [](const Eigen::VectorXd&) {
        std::vector<Eigen::MatrixXd> hs(2, Eigen::MatrixXd::Zero(4, 4));
        hs[0](0, 0) = hs[0](1, 1) = 2.0;
        hs[1](2, 2) = hs[1](3, 3) = 2.0;
        return hs;
    };
    p.f_eval = [](const Eigen::VectorXd& v) { return (v(1) - 8.0) / (8.0 * v(0)); };
    p.f_grad = [](const Eigen::VectorXd& v) {
        Eigen::VectorXd g(2);
        g(0) = -(v(1) - 8.0) / (8.0 * v(0) * v(0));
        g(1) = 1.0 / (8.0 * v(0));
        return g;
    };
    p.f_hess = [](const Eigen::VectorXd& v) {
        Eigen::MatrixXd h(2, 2);
        h(0, 0) = (v(1) - 8.0) / (4.0 * v(0) * v(0) * v(0));
        h(0, 1) = h(1, 0) = -1.0 / (8.0 * v(0) * v(0));
        h(1, 1) = 0.0;
        return h;
    };
    p.in_W = [](const Eigen::VectorXd& v) { return v(0) != 0.0; };
    sys.pair = std::move(p);

    sys.seed_point = [](int k) {
        const double R = std::pow(16.0 * kPi * kPi * k * k, -1.0 / 6.0);
        return (Eigen::VectorXd(4) << R, 0.0, 0.0, 8.0 * kPi * k * R * R * R).finished();
    };
    sys.seed_mean = [](int k) {
        const double R = std::pow(16.0 * kPi * kPi * k * k, -1.0 / 6.0);
        return (Eigen::VectorXd(2) << R * R, 4.0).finished();
    };
    return sys;
}

SystemSpec example5_oscillators(const std::map<std::string, double>& params) {
    reject_unknown(params, {"epsilon", "factors"});
    const double eps = get(params, "epsilon", 0.1);
    const int m = static_cast<int>(get(params, "factors", 2.0));
    if (m < 1) throw InvalidArgumentError("example5: factors must be >= 1");

    // f(x) = 1/2 sum x_i^2 + eps sum_{i<j} x_i x_j.
    CouplingFunction f;
    f.f = [eps, m](const Eigen::VectorXd& v) {
        double s = 0.5 * v.squaredNorm();
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j) s += eps * v(i) * v(j);
        return s;
    };
    auto coupling = [eps, m]() {
        Eigen::MatrixXd a = Eigen::MatrixXd::Constant(m, m, eps);
        a.diagonal().setOnes();
        return a;
    }();
    f.df = [coupling](const Eigen::VectorXd& v) { return Eigen::VectorXd(coupling * v); };
    f.d2f = [coupling](const Eigen::VectorXd&) { return coupling; };
    f.in_W = [](const Eigen::VectorXd&) { return true; };

    SystemSpec sys;
    sys.name = "example5-coupled-oscillators";
    sys.params = {{"epsilon", eps}, {"factors", static_cast<double>(m)}};
    sys.pair = product_pair(std::vector<PairSpec>(m, harmonic_factor()), std::move(f));
    sys.seed_point = [m](int k) {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(2 * m);
        for (int j = 0; j < m; ++j) x(j) = 3.5 * std::sqrt(double(k));
        return x;
    };
    sys.seed_mean = [m](int k) {
        return Eigen::VectorXd::Constant(m, 6.0 * k).eval();
    };
    return sys;
}

}  // namespace

SystemSpec make_system(const std::string& name, const std::map<std::string, double>& params) {
    if (name == "example1-linear") return example1_linear(params);
    if (name == "example2-harmonic") return example2_harmonic(params);
    if (name == "example3-helium") return example3_helium(params);
    if (name == "example4-bov") return example4_bov(params);
    if (name == "example5-coupled-oscillators") return example5_oscillators(params);
    throw InvalidArgumentError("unknown system: " + name);
}

std::vector<std::string> system_names() {
    return {"example1-linear", "example2-harmonic", "example3-helium", "example4-bov",
            "example5-coupled-oscillators"};
}

}  // namespace meanloop
