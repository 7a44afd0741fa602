#include "bridgesim/io.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

namespace bridgesim {

std::string dtos(double v) {
    char buf[40];
    // %.17g round-trips; try the shorter form first and keep it when exact.
    snprintf(buf, sizeof buf, "%.15g", v);
    if (std::stod(buf) != v) snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
    if (!out) throw std::runtime_error("short write to " + path);
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, sep)) out.push_back(tok);
    return out;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

}  // namespace

std::string trajectory_to_csv(const JointTrajectory& traj) {
    traj.validate();
    const bool has_v = !traj.points.front().v.empty();
    const bool has_a = !traj.points.front().a.empty();
    std::string out = "t";
    for (int j = 0; j < traj.dof; ++j) out += ",q" + std::to_string(j);
    if (has_v)
        for (int j = 0; j < traj.dof; ++j) out += ",v" + std::to_string(j);
    if (has_a)
        for (int j = 0; j < traj.dof; ++j) out += ",a" + std::to_string(j);
    out += "\n";
    for (const auto& p : traj.points) {
        out += dtos(p.t);
        for (double q : p.q) out += "," + dtos(q);
        if (has_v)
            for (double v : p.v) out += "," + dtos(v);
        if (has_a)
            for (double a : p.a) out += "," + dtos(a);
        out += "\n";
    }
    return out;
}

JointTrajectory trajectory_from_csv(const std::string& text) {
    const auto lines = lines_of(text);
    if (lines.empty()) throw std::invalid_argument("empty trajectory file");
    const auto header = split(lines[0], ',');
    if (header.empty() || header[0] != "t")
        throw std::invalid_argument("trajectory header must start with t");
    int dof = 0;
    while (1 + dof < static_cast<int>(header.size()) &&
           header[1 + dof] == "q" + std::to_string(dof))
        ++dof;
    if (dof == 0) throw std::invalid_argument("no q columns in trajectory header");
    bool has_v = false, has_a = false;
    size_t col = 1 + static_cast<size_t>(dof);
    if (col < header.size() && header[col] == "v0") {
        has_v = true;
        col += static_cast<size_t>(dof);
    }
    if (col < header.size() && header[col] == "a0") {
        has_a = true;
        col += static_cast<size_t>(dof);
    }
    if (col != header.size()) throw std::invalid_argument("unexpected trajectory columns");

    JointTrajectory traj;
    traj.dof = dof;
    for (size_t i = 1; i < lines.size(); ++i) {
        const auto toks = split(lines[i], ',');
        if (toks.size() != header.size())
            throw std::invalid_argument("trajectory row width mismatch");
        TrajectoryPoint p;
        size_t k = 0;
        p.t = std::stod(toks[k++]);
        for (int j = 0; j < dof; ++j) p.q.push_back(std::stod(toks[k++]));
        if (has_v)
            for (int j = 0; j < dof; ++j) p.v.push_back(std::stod(toks[k++]));
        if (has_a)
            for (int j = 0; j < dof; ++j) p.a.push_back(std::stod(toks[k++]));
        traj.points.push_back(std::move(p));
    }
    traj.validate();
    return traj;
}

std::string cloud_to_ply(const PointCloud& cloud) {
    std::string out = "ply\nformat ascii 1.0\nelement vertex " +
                      std::to_string(cloud.size()) +
                      "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
    for (const auto& p : cloud.points)
        out += dtos(p.x) + " " + dtos(p.y) + " " + dtos(p.z) + "\n";
    return out;
}

PointCloud cloud_from_ply(const std::string& text) {
    const auto lines = lines_of(text);
    size_t i = 0;
    if (lines.empty() || lines[0] != "ply") throw std::invalid_argument("not a ply file");
    size_t count = 0;
    for (; i < lines.size() && lines[i] != "end_header"; ++i) {
        const auto toks = split(lines[i], ' ');
        if (toks.size() == 3 && toks[0] == "element" && toks[1] == "vertex")
            count = std::stoul(toks[2]);
    }
    if (i == lines.size()) throw std::invalid_argument("ply header unterminated");
    ++i;
    PointCloud cloud;
    cloud.points.reserve(count);
    for (; i < lines.size() && cloud.size() < count; ++i) {
        const auto toks = split(lines[i], ' ');
        if (toks.size() < 3) throw std::invalid_argument("short ply vertex row");
        cloud.points.push_back({std::stod(toks[0]), std::stod(toks[1]), std::stod(toks[2])});
    }
    if (cloud.size() != count) throw std::invalid_argument("ply vertex count mismatch");
    return cloud;
}

std::string cloud_to_csv(const PointCloud& cloud) {
    std::string out = "x,y,z\n";
    for (const auto& p : cloud.points)
        out += dtos(p.x) + "," + dtos(p.y) + "," + dtos(p.z) + "\n";
    return out;
}

PointCloud cloud_from_csv(const std::string& text) {
    const auto lines = lines_of(text);
    if (lines.empty() || lines[0] != "x,y,z")
        throw std::invalid_argument("cloud csv needs an x,y,z header");
    PointCloud cloud;
    for (size_t i = 1; i < lines.size(); ++i) {
        const auto toks = split(lines[i], ',');
        if (toks.size() != 3) throw std::invalid_argument("cloud csv row width mismatch");
        cloud.points.push_back({std::stod(toks[0]), std::stod(toks[1]), std::stod(toks[2])});
    }
    return cloud;
}

std::string rois_to_json(const std::vector<Roi2D>& rois) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : rois)
        j.push_back({{"category", r.category},
                     {"u_min", r.u_min},
                     {"v_min", r.v_min},
                     {"u_max", r.u_max},
                     {"v_max", r.v_max}});
    return j.dump(2) + "\n";
}

std::vector<Roi2D> rois_from_json(const std::string& text) {
    std::vector<Roi2D> out;
    for (const auto& j : nlohmann::json::parse(text)) {
        Roi2D r;
        r.category = j.at("category").get<std::string>();
        r.u_min = j.at("u_min").get<double>();
        r.v_min = j.at("v_min").get<double>();
        r.u_max = j.at("u_max").get<double>();
        r.v_max = j.at("v_max").get<double>();
        if (r.u_min >= r.u_max || r.v_min >= r.v_max)
            throw std::invalid_argument("empty roi");
        out.push_back(std::move(r));
    }
    return out;
}

std::string catalog_to_json(const Catalog& catalog) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& c : catalog.categories)
        j.push_back({{"name", c.name}, {"extents", {c.w, c.d, c.h}}});
    return j.dump(2) + "\n";
}

Catalog catalog_from_json(const std::string& text) {
    Catalog cat;
    for (const auto& j : nlohmann::json::parse(text)) {
        CategorySpec c;
        c.name = j.at("name").get<std::string>();
        const auto& e = j.at("extents");
        c.w = e.at(0).get<double>();
        c.d = e.at(1).get<double>();
        c.h = e.at(2).get<double>();
        if (c.w <= 0.0 || c.d <= 0.0 || c.h <= 0.0)
            throw std::invalid_argument("category extents must be positive");
        cat.categories.push_back(std::move(c));
    }
    return cat;
}

std::string truth_to_json(const std::vector<GroundTruthBox>& truth) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& t : truth) {
        nlohmann::json corners = nlohmann::json::array();
        for (const auto& c : t.corners) corners.push_back({c.x, c.y, c.z});
        j.push_back({{"category", t.category},
                     {"center", {t.center.x, t.center.y, t.center.z}},
                     {"yaw", t.yaw},
                     {"corners", corners}});
    }
    return j.dump(2) + "\n";
}

std::vector<GroundTruthBox> truth_from_json(const std::string& text) {
    std::vector<GroundTruthBox> out;
    for (const auto& j : nlohmann::json::parse(text)) {
        GroundTruthBox t;
        t.category = j.at("category").get<std::string>();
        t.center = {j.at("center").at(0).get<double>(), j.at("center").at(1).get<double>(),
                    j.at("center").at(2).get<double>()};
        t.yaw = j.value("yaw", 0.0);
        const auto& corners = j.at("corners");
        for (size_t i = 0; i < 8; ++i)
            t.corners[i] = {corners.at(i).at(0).get<double>(),
                            corners.at(i).at(1).get<double>(),
                            corners.at(i).at(2).get<double>()};
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace bridgesim
