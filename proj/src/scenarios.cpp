#include "smf/scenarios.hpp"

#include <cmath>
#include <optional>
#include <string>

namespace smf::scenarios {

namespace {

Vec polar_inverse(double range, double bearing, const Vec& origin)
{
    return Eigen::Vector2d(range * std::cos(bearing) + origin[0], range * std::sin(bearing) + origin[1]);
}

void require_range(double range)
{
    if (range < 0.0) throw DomainError("negative range " + std::to_string(range));
}

}  // namespace

Mat radar_transition(double T)
{
    Mat F = Mat::Identity(4, 4);
    F(0, 2) = T;
    F(1, 3) = T;
    return F;
}

Mat radar_process_noise(double T, double q_scale)
{
    Mat Q = Mat::Zero(4, 4);
    const double t3 = T * T * T / 3.0, t2 = T * T / 2.0;
    Q(0, 0) = Q(1, 1) = t3;
    Q(0, 2) = Q(2, 0) = Q(1, 3) = Q(3, 1) = t2;
    Q(2, 2) = Q(3, 3) = T;
    return q_scale * Q;
}

dsmf::SystemModel radar_model(const RadarParams& p)
{
    const Mat F = radar_transition(p.T);
    const Vec s = p.sensor;
    dsmf::SystemModel m;
    m.state_dim = 4;
    m.meas_dim = 2;
    m.f = [F](const Vec& x, int) -> Vec { return F * x; };
    m.f_jacobian = [F](const Vec&, int) -> Mat { return F; };
    m.h = [s](const Vec& x) -> Vec {
        const double dx = x[0] - s[0], dy = x[1] - s[1];
        return Eigen::Vector2d(std::hypot(dx, dy), std::atan2(dy, dx));
    };
    m.h_jacobian = [s](const Vec& x) -> Mat {
        const double dx = x[0] - s[0], dy = x[1] - s[1];
        const double r2 = dx * dx + dy * dy, r = std::sqrt(r2);
        Mat H = Mat::Zero(2, 4);
        H << dx / r, dy / r, 0, 0, -dy / r2, dx / r2, 0, 0;
        return H;
    };
    m.h_inv = [s](const Vec& y, const Vec& v, std::span<const double>) -> Vec {
        const double range = y[0] - v[0];
        require_range(range);
        return polar_inverse(range, y[1] - v[1], s);
    };
    m.projection = Mat::Zero(2, 4);
    m.projection(0, 0) = m.projection(1, 1) = 1.0;
    m.Q = radar_process_noise(p.T, p.q_scale);
    m.R = p.R;
    m.angle_components = {1};
    return m;
}

dsmf::SystemModel robot_model(const RobotParams& p)
{
    if (p.u_r == 0.0) throw DimensionError("rotational command u_r must be nonzero");
    const double ratio = p.u_p / p.u_r, turn = p.T0 * p.u_r;
    const Vec s = p.landmark;
    dsmf::SystemModel m;
    m.state_dim = 3;
    m.meas_dim = 2;
    m.f = [ratio, turn](const Vec& x, int) -> Vec {
        const double th = x[2];
        return Eigen::Vector3d(x[0] - ratio * (std::sin(th) - std::sin(th + turn)),
                               x[1] + ratio * (std::cos(th) - std::cos(th + turn)), th + turn);
    };
    m.f_jacobian = [ratio, turn](const Vec& x, int) -> Mat {
        const double th = x[2];
        Mat J = Mat::Identity(3, 3);
        J(0, 2) = -ratio * (std::cos(th) - std::cos(th + turn));
        J(1, 2) = -ratio * (std::sin(th) - std::sin(th + turn));
        return J;
    };
    m.h = [s](const Vec& x) -> Vec {
        const double dx = x[0] - s[0], dy = x[1] - s[1];
        return Eigen::Vector2d(std::hypot(dx, dy), x[2] - std::atan2(dy, dx));
    };
    m.h_jacobian = [s](const Vec& x) -> Mat {
        const double dx = x[0] - s[0], dy = x[1] - s[1];
        const double r2 = dx * dx + dy * dy, r = std::sqrt(r2);
        Mat H(2, 3);
        H << dx / r, dy / r, 0, dy / r2, -dx / r2, 1;
        return H;
    };
    // The landmark-to-robot direction is theta - phi with phi = y2 - v2.
    m.h_inv = [s](const Vec& y, const Vec& v, std::span<const double> aux) -> Vec {
        if (aux.size() != 1) throw DimensionError("robot inverse measurement needs the heading");
        const double range = y[0] - v[0];
        require_range(range);
        return polar_inverse(range, aux[0] - (y[1] - v[1]), s);
    };
    m.projection = Mat::Zero(2, 3);
    m.projection(0, 0) = m.projection(1, 1) = 1.0;
    m.Q = p.Q;
    m.R = p.R;
    m.angle_components = {1};
    const bool use_sqrt = p.sqrt_heading;
    m.aux_bounds = [use_sqrt](const Ellipsoid& pred) {
        const double p33 = pred.shape()(2, 2);
        const double half = use_sqrt ? std::sqrt(p33) : p33;
        const double c = pred.center()[2];
        return std::vector<dsmf::Interval>{{c - half, c + half}};
    };
    return m;
}

Scenario radar(const RadarParams& p)
{
    return {"radar", radar_model(p), p.x0, p.P0, p.steps, -1};
}

Scenario robot(const RobotParams& p)
{
    return {"robot", robot_model(p), p.x0, p.P0, p.steps, 2};
}

Truth simulate_truth(const Scenario& s, int steps, Rng& rng)
{
    const auto& m = s.model;
    Truth t;
    t.states.push_back(s.x0);
    const bool has_q = m.Q.trace() > 0.0, has_r = m.R.trace() > 0.0;
    const Ellipsoid* qe = nullptr;
    const Ellipsoid* re = nullptr;
    std::optional<Ellipsoid> qs, rs;
    if (has_q) qe = &qs.emplace(Vec::Zero(m.state_dim), m.Q);
    if (has_r) re = &rs.emplace(Vec::Zero(m.meas_dim), m.R);
    for (int k = 1; k <= steps; ++k) {
        const Vec w = qe ? Vec(sample_interior(*qe, 1, rng).point(0)) : Vec::Zero(m.state_dim);
        const Vec x = m.f(t.states.back(), k - 1) + w;
        const Vec v = re ? Vec(sample_interior(*re, 1, rng).point(0)) : Vec::Zero(m.meas_dim);
        t.states.push_back(x);
        t.measurements.push_back(m.h(x) + v);
        t.process_noise.push_back(w);
        t.meas_noise.push_back(v);
    }
    return t;
}

Vec initial_estimate(const Scenario& s, double scale, Rng& rng)
{
    if (!(scale > 0.0)) return s.x0;
    const Ellipsoid e(s.x0, scale * s.P0);
    return sample_interior(e, 1, rng).point(0);
}

}  // namespace smf::scenarios
