#pragma once

// Benchmark systems: 2-D range/bearing radar tracking of a constant-velocity
// target, and a planar robot localizing against one known landmark.

#include "smf/dsmf.hpp"

#include <string>
#include <vector>

namespace smf::scenarios {

struct RadarParams {
    double T = 1.0;
    Vec sensor = Eigen::Vector2d(420.0, 420.0);
    double q_scale = 10.0;  // Q = q_scale * kinematic block matrix
    Mat R = Eigen::Vector2d(100.0, 0.5).asDiagonal();
    Vec x0 = Eigen::Vector4d(50.0, 30.0, 5.0, 5.0);
    Mat P0 = 200.0 * Mat::Identity(4, 4);
    int steps = 60;
};

struct RobotParams {
    double T0 = 1.0;
    double u_p = 0.085;
    double u_r = 0.015;
    Vec landmark = Eigen::Vector2d(50.0, 50.0);
    Mat Q = Eigen::Vector3d(1e-6, 1e-6, 1e-7).asDiagonal();
    Mat R = Mat::Identity(2, 2);
    Vec x0 = Eigen::Vector3d(10.0, 10.0, 1.0);
    Mat P0 = Eigen::Vector3d(1.0, 1.0, 0.1).asDiagonal();
    int steps = 100;
    /// Heading half-width sqrt(P33) instead of the raw entry P33.
    bool sqrt_heading = false;
};

/// Constant-velocity transition for state [px, py, vx, vy].
Mat radar_transition(double T);
/// 4x4 kinematic process-noise shape scaled by q_scale.
Mat radar_process_noise(double T, double q_scale);

dsmf::SystemModel radar_model(const RadarParams& p = {});
dsmf::SystemModel robot_model(const RobotParams& p = {});

struct Scenario {
    std::string name;
    dsmf::SystemModel model;
    Vec x0;
    Mat P0;
    int steps = 0;
    /// Index of the heading in the state, or -1.
    int heading_index = -1;
};

Scenario radar(const RadarParams& p = {});
Scenario robot(const RobotParams& p = {});

struct Truth {
    std::vector<Vec> states;        // x_0 ... x_K
    std::vector<Vec> measurements;  // y_1 ... y_K (index k - 1)
    std::vector<Vec> process_noise;
    std::vector<Vec> meas_noise;
};

/// Noises are drawn uniformly from the interiors of the Q and R ellipsoids.
Truth simulate_truth(const Scenario& s, int steps, Rng& rng);

/// Initial estimate drawn uniformly from {x0, scale * P0}.
Vec initial_estimate(const Scenario& s, double scale, Rng& rng);

}  // namespace smf::scenarios
