#pragma once

#include <dss/common.hpp>
#include <dss/lp.hpp>
#include <dss/sweep.hpp>

namespace dss {

struct GofReport {
    double volume_coverage = 0;
    double skeletal_symmetry = 0;
    double avg_tidiness = 0;
    double strict_tidiness = 0;
    double score1 = 0;  // coverage * symmetry * average tidiness
    double score2 = 0;  // coverage * symmetry * strict tidiness
    int sheet_degree = 0, spine_degree = 0;
    bool rcc_pass = true;
};

// Jaccard index of the mesh against the implied boundary: the mesh collapsed
// onto the cloud of spoke tips and vein endpoints.
double volume_coverage(const TriangleMesh& mesh, const SweptModel& model, int resolution = 128);
double volume_coverage_points(const TriangleMesh& mesh, const std::vector<Vec3>& implied,
                              int resolution = 128);

// Length-weighted mean of min/max ratios over paired up/down spokes and
// right/left veins.
double skeletal_symmetry(const std::vector<double>& up, const std::vector<double>& down,
                         const std::vector<double>& vein_right,
                         const std::vector<double>& vein_left);
double skeletal_symmetry(const LpDssRep& rep, const SweptModel& model);

struct Tidiness {
    double average = 0;  // 1 - mean scaled frame perturbation
    double strict = 0;   // 1 - scaled worst perturbation
};

// Frame perturbation of the spine and section curves plus the per-station
// rotation offsets between spine and section.
Tidiness tidiness(const StationFrames& frames);

struct GofComponents {
    double volume_coverage = 0, skeletal_symmetry = 0;
    double avg_tidiness = 0, strict_tidiness = 0;
};

GofReport gof_score(const GofComponents& components);

GofReport evaluate_fit(const TriangleMesh& mesh, const SweptModel& model, const LpDssRep& rep,
                       int jaccard_resolution = 128);

void save_gof_csv(const std::vector<GofReport>& reports, const std::string& path);
std::string format_gof_table(const std::vector<GofReport>& reports);

}  // namespace dss
