#include "degopt/io.hpp"

#include <cstdio>
#include <fstream>

#include "degopt/errors.hpp"

namespace degopt {

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hash_hex(const std::string& bytes) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(bytes)));
    return buf;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    return out;
}

}  // namespace

void write_trajectory_csv(const std::string& path, const Mesh1D& mesh, const Trajectory& y) {
    auto out = open_out(path);
    out << "t,x,value\n";
    for (int n = 0; n < y.n_levels(); ++n) {
        const double t = y.grid().t(n);
        for (int i = 0; i < y.n_nodes(); ++i)
            out << format_double(t) << ',' << format_double(mesh.nodes[i]) << ','
                << format_double(y.at(n, i)) << '\n';
    }
}

void write_control_csv(const std::string& path, const Mesh1D& mesh, const ControlField& v) {
    auto out = open_out(path);
    out << "t,x,value\n";
    for (int n = 0; n < v.n_levels(); ++n) {
        const double t = v.grid().t(n);
        for (int k = 0; k < v.n_omega(); ++k)
            out << format_double(t) << ',' << format_double(mesh.nodes[v.omega_nodes()[k]]) << ','
                << format_double(v.at(n, k)) << '\n';
    }
}

void write_iteration_csv(const std::string& path, const std::vector<IterationRecord>& history) {
    auto out = open_out(path);
    out << "iter,cost,residual,step\n";
    for (const auto& rec : history)
        out << rec.iter << ',' << format_double(rec.cost) << ',' << format_double(rec.residual)
            << ',' << format_double(rec.step) << '\n';
}

nlohmann::json to_json(const SSCReport& rep) {
    return {{"beta", rep.beta},       {"T", rep.T},
            {"y0_linf", rep.y0_linf}, {"yd_linf", rep.yd_linf},
            {"threshold", rep.threshold}, {"alpha", rep.alpha},
            {"delta", rep.delta},     {"satisfied", rep.satisfied}};
}

nlohmann::json to_json(const ActiveSetReport& rep) {
    return {{"tau", rep.tau},
            {"lower_active", rep.lower_active},
            {"upper_active", rep.upper_active},
            {"inactive", rep.inactive},
            {"points", rep.lower_active + rep.upper_active + rep.inactive}};
}

nlohmann::json to_json(const CertificationRecord& rec) {
    return {{"stationarity_residual", rec.stationarity_residual},
            {"trichotomy",
             {{"passed", rec.trichotomy_passed},
              {"worst_gap", rec.trichotomy_worst},
              {"points", rec.trichotomy_points}}},
            {"ssc", to_json(rec.ssc)},
            {"hessian_samples",
             {{"count", rec.cone_samples},
              {"min_rayleigh", rec.min_rayleigh},
              {"coercivity_passed", rec.coercivity_passed}}},
            {"growth_probe",
             {{"samples", rec.growth_samples},
              {"negative", rec.growth_negative},
              {"gamma_hat", rec.gamma_hat},
              {"eps_probe", rec.eps_probe}}}};
}

nlohmann::json to_json(const CheckReport& rep) {
    nlohmann::json j = {{"name", rep.name}, {"passed", rep.passed}};
    j["margins"] = rep.margins;
    if (!rep.witness.empty()) j["witness"] = rep.witness;
    return j;
}

void write_json(const std::string& path, const nlohmann::json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

}  // namespace degopt
