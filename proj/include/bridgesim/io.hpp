#pragma once

#include <string>
#include <vector>

#include "bridgesim/perception.hpp"
#include "bridgesim/scene.hpp"
#include "bridgesim/trajmath.hpp"

namespace bridgesim {

// Stable shortest-round-trip formatting used for every CSV/JSON number the
// experiments emit, so identical runs produce identical bytes.
std::string dtos(double v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Trajectory CSV: header t,q0..q{dof-1}[,v0..][,a0..]; seconds and degrees.
std::string trajectory_to_csv(const JointTrajectory& traj);
JointTrajectory trajectory_from_csv(const std::string& text);

// ASCII PLY with float64 x y z.
std::string cloud_to_ply(const PointCloud& cloud);
PointCloud cloud_from_ply(const std::string& text);

// CSV with header x,y,z.
std::string cloud_to_csv(const PointCloud& cloud);
PointCloud cloud_from_csv(const std::string& text);

std::string rois_to_json(const std::vector<Roi2D>& rois);
std::vector<Roi2D> rois_from_json(const std::string& text);

std::string catalog_to_json(const Catalog& catalog);
Catalog catalog_from_json(const std::string& text);

std::string truth_to_json(const std::vector<GroundTruthBox>& truth);
std::vector<GroundTruthBox> truth_from_json(const std::string& text);

}  // namespace bridgesim
