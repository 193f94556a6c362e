// cstar: completely bounded norms, C*-envelopes, and Banach-Stone
// decompositions of complete isometries for matrix operator spaces.
//
// Subcommands: cbnorm, envelope, decompose, check-isometry, blockdecomp.
// Exit codes: 0 verified success, 2 computed negative answer, 1 error.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cstar/banach_stone.hpp"
#include "cstar/envelope.hpp"
#include "cstar/json_io.hpp"
#include "cstar/operator_space.hpp"
#include "cstar/star_algebra.hpp"

using nlohmann::json;
using namespace cstar;

namespace {

struct RunConfig {
    std::string command;
    std::string space_path;
    std::string map_path;
    double tol = 1e-8;
    std::uint64_t seed = kDefaultSeed;
    std::optional<int> level;
    std::string format = "json";
};

json config_json(const RunConfig& cfg) {
    json j{{"command", cfg.command}, {"tol", cfg.tol},      {"seed", cfg.seed},
           {"format", cfg.format},   {"space", cfg.space_path}, {"map", cfg.map_path}};
    j["level"] = cfg.level ? json(*cfg.level) : json(nullptr);
    return j;
}

json load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open input file: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& ex) {
        throw Error("malformed JSON in " + path + ": " + ex.what());
    }
}

std::vector<CMatrix> parse_matrix_list(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty())
        throw Error("field '" + field + "' must be a nonempty array of matrices");
    std::vector<CMatrix> out;
    out.reserve(j.size());
    for (const auto& item : j) out.push_back(matrix_from_json(item));
    return out;
}

// A space file lists generators; they are orthonormalized on load. A
// non-null unit_index marks the space as unital.
opspace::OperatorSpace load_space(const std::string& path) {
    const json j = load_file(path);
    if (!j.contains("basis")) throw Error("space file lacks 'basis': " + path);
    const bool unital = j.contains("unit_index") && !j.at("unit_index").is_null();
    auto gens = parse_matrix_list(j.at("basis"), "basis");
    if (j.contains("ambient_dim") &&
        j.at("ambient_dim").get<Eigen::Index>() != gens[0].rows())
        throw Error("space file: ambient_dim does not match the generators");
    return opspace::make_space(gens, unital);
}

// A map file pairs domain generators with their images; the map is the
// linear extension to the span. Generators must be linearly independent
// so that the extension is well defined.
opspace::SpaceMap load_map(const std::string& path) {
    const json j = load_file(path);
    if (!j.contains("domain") || !j.contains("images") || !j.contains("codomain_dim"))
        throw Error("map file needs 'domain', 'codomain_dim' and 'images': " + path);
    const json& dj = j.at("domain");
    if (!dj.contains("basis")) throw Error("map file: domain lacks 'basis'");
    const bool unital = dj.contains("unit_index") && !dj.at("unit_index").is_null();
    const auto gens = parse_matrix_list(dj.at("basis"), "domain.basis");
    const auto images = parse_matrix_list(j.at("images"), "images");
    if (gens.size() != images.size())
        throw Error("map file: generator and image counts differ");
    const int m = j.at("codomain_dim").get<int>();
    for (const auto& img : images)
        if (img.rows() != m || img.cols() != m)
            throw Error("map file: images must be codomain_dim x codomain_dim");

    opspace::OperatorSpace domain = opspace::make_space(gens, unital);
    if (domain.dim() != static_cast<int>(gens.size()))
        throw Error("map file: domain generators are linearly dependent; the linear "
                    "extension would be ambiguous");

    // Express each canonical basis element in the generators and push the
    // images through the same coefficients.
    const Eigen::Index n = gens[0].rows();
    CMatrix stacked(n * n, static_cast<Eigen::Index>(gens.size()));
    for (size_t i = 0; i < gens.size(); ++i)
        stacked.col(static_cast<Eigen::Index>(i)) =
            Eigen::Map<const Eigen::VectorXcd>(gens[i].data(), gens[i].size());
    Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(stacked);

    opspace::SpaceMap t;
    t.codomain_dim = m;
    t.domain = std::move(domain);
    t.images.reserve(t.domain.basis.size());
    for (const auto& b : t.domain.basis) {
        const Eigen::VectorXcd c =
            cod.solve(Eigen::Map<const Eigen::VectorXcd>(b.data(), b.size()));
        CMatrix img = CMatrix::Zero(m, m);
        for (size_t i = 0; i < images.size(); ++i) img += c(static_cast<Eigen::Index>(i)) * images[i];
        t.images.push_back(std::move(img));
    }
    return t;
}

json profile_json(const std::vector<std::pair<int, int>>& profile) {
    json out = json::array();
    for (const auto& [size, mult] : profile) out.push_back({size, mult});
    return out;
}

std::string profile_text(const std::vector<std::pair<int, int>>& profile) {
    std::string out;
    for (size_t i = 0; i < profile.size(); ++i) {
        if (i) out += " + ";
        out += "M_" + std::to_string(profile[i].first);
        if (profile[i].second > 1) out += "^(+" + std::to_string(profile[i].second) + ")";
    }
    return out.empty() ? "0" : out;
}

json matrices_json(const std::vector<CMatrix>& mats) {
    json out = json::array();
    for (const auto& m : mats) out.push_back(matrix_to_json(m));
    return out;
}

void emit(const RunConfig& cfg, const std::string& verdict, json data, json residuals) {
    if (cfg.format == "json") {
        json report{{"command", cfg.command},
                    {"verdict", verdict},
                    {"data", std::move(data)},
                    {"residuals", std::move(residuals)},
                    {"config", config_json(cfg)}};
        std::cout << report.dump(2) << "\n";
    } else {
        std::cout << cfg.command << ": " << verdict << "\n";
        if (data.contains("generated_profile"))
            std::cout << "  generated: "
                      << data.at("generated_profile_text").get<std::string>() << "\n";
        if (data.contains("envelope_profile"))
            std::cout << "  envelope:  " << data.at("envelope_profile_text").get<std::string>()
                      << "\n";
        if (data.contains("profile_text"))
            std::cout << "  profile:   " << data.at("profile_text").get<std::string>() << "\n";
        if (data.contains("cb_lower_bound"))
            std::cout << "  cb lower bound: " << data.at("cb_lower_bound").get<double>() << "\n";
        for (auto& [key, value] : residuals.items())
            std::cout << "  residual " << key << " = " << value.dump() << "\n";
    }
}

int run_cbnorm(const RunConfig& cfg) {
    const auto t = load_map(cfg.map_path);
    const int level =
        cfg.level ? *cfg.level : std::min(t.domain.ambient_dim, t.codomain_dim);
    const auto cert = opspace::is_completely_contractive(t, cfg.tol);
    const auto bound = opspace::level_norm_lower_bound(t, level, 32, cfg.seed);
    json data{{"cb_lower_bound", bound.bound},
              {"level", level},
              {"witness", matrix_to_json(bound.witness)},
              {"certificate_level", cert.level_checked}};
    if (cert.witness) {
        data["violation_witness"] = matrix_to_json(*cert.witness);
        data["violation_ratio"] = cert.witness_ratio;
    }
    emit(cfg, opspace::to_string(cert.verdict), std::move(data),
         json{{"feasibility", cert.feasibility_residual}});
    return cert.verdict == opspace::CbVerdict::CompletelyContractive ? 0 : 2;
}

int run_envelope(const RunConfig& cfg) {
    const auto x = load_space(cfg.space_path);
    const auto env = envelope::c_star_envelope(x, cfg.tol);
    json kept = json::array();
    for (int k : env.kept_blocks) kept.push_back(k);
    json data{{"generated_profile", profile_json(env.generated.profile())},
              {"generated_profile_text", profile_text(env.generated.profile())},
              {"envelope_profile", profile_json(env.envelope_profile)},
              {"envelope_profile_text", profile_text(env.envelope_profile)},
              {"kept_blocks", std::move(kept)},
              {"co_support", matrix_to_json(env.co_support)}};
    emit(cfg, "ok", std::move(data), json::object());
    return 0;
}

int run_check_isometry(const RunConfig& cfg) {
    const auto t = load_map(cfg.map_path);
    const auto check = opspace::is_complete_isometry(t, cfg.tol);
    json data{{"complete_isometry", check.complete_isometry},
              {"injective", check.injective},
              {"forward", opspace::to_string(check.forward.verdict)},
              {"inverse", opspace::to_string(check.inverse.verdict)}};
    const auto* violated = check.forward.verdict == opspace::CbVerdict::Violated
                               ? &check.forward
                               : (check.inverse.verdict == opspace::CbVerdict::Violated
                                      ? &check.inverse
                                      : nullptr);
    if (violated && violated->witness) {
        data["witness_level"] = violated->level_checked;
        data["witness_ratio"] = violated->witness_ratio;
        data["witness"] = matrix_to_json(*violated->witness);
    }
    emit(cfg, check.complete_isometry ? "complete_isometry" : "not_complete_isometry",
         std::move(data),
         json{{"forward_feasibility", check.forward.feasibility_residual},
              {"inverse_feasibility", check.inverse.feasibility_residual}});
    return check.complete_isometry ? 0 : 2;
}

int run_decompose(const RunConfig& cfg) {
    const auto t = load_map(cfg.map_path);
    banachstone::IsometryDecomposition dec;
    try {
        const CMatrix t1 = t.apply(matcore::identity(t.domain.ambient_dim));
        const bool unital_map =
            (t1 - matcore::identity(t.codomain_dim)).norm() <= cfg.tol * std::sqrt(t.codomain_dim);
        dec = unital_map ? banachstone::decompose_unital(t, cfg.tol)
                         : banachstone::decompose_general(t, cfg.tol);
    } catch (const ContractViolation& ex) {
        emit(cfg, "not_complete_isometry", json{{"reason", ex.what()}}, json::object());
        return 2;
    }
    json residuals{{"factorization", dec.residuals.factorization},
                   {"reverse", dec.residuals.reverse},
                   {"initial", dec.residuals.initial},
                   {"final", dec.residuals.final},
                   {"multiplicativity", dec.residuals.multiplicativity},
                   {"unitality", dec.residuals.unitality}};
    json data{{"e", matrix_to_json(dec.e)},
              {"f", matrix_to_json(dec.f)},
              {"u", matrix_to_json(dec.u)},
              {"pi", matrices_json(dec.pi_images)},
              {"verified", dec.verified}};

    bool diagonal_case = true;
    for (const auto& b : t.domain.basis) {
        CMatrix off = b;
        off.diagonal().setZero();
        if (off.norm() > 1e-10) diagonal_case = false;
    }
    for (const auto& img : t.images) {
        CMatrix off = img;
        off.diagonal().setZero();
        if (off.norm() > 1e-10) diagonal_case = false;
    }
    if (diagonal_case) {
        const auto comm = banachstone::commutative_form(dec, t);
        json gamma = json::array();
        for (const auto& g : comm.gamma) gamma.push_back({g.real(), g.imag()});
        data["commutative"] = json{{"ideal_coordinates", comm.ideal_coordinates},
                                   {"kept_coordinates", comm.kept_coordinates},
                                   {"gamma", std::move(gamma)},
                                   {"selection", comm.selection},
                                   {"theta", matrices_json(comm.theta_images)}};
    }
    emit(cfg, "decomposed", std::move(data), std::move(residuals));
    return 0;
}

int run_blockdecomp(const RunConfig& cfg) {
    const auto x = load_space(cfg.space_path);
    const auto alg = staralg::generate_star_algebra(x.basis, /*include_unit=*/true, cfg.seed);
    std::vector<CMatrix> projections;
    for (const auto& b : alg.blocks) projections.push_back(b.projection);
    json data{{"ambient_dim", alg.ambient_dim},
              {"dimension", alg.dim()},
              {"profile", profile_json(alg.profile())},
              {"profile_text", profile_text(alg.profile())},
              {"central_projections", matrices_json(projections)},
              {"basis", matrices_json(alg.basis)}};
    emit(cfg, "ok", std::move(data), json::object());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite-dimensional operator spaces: cb norms, C*-envelopes, "
                 "Banach-Stone decompositions"};
    app.require_subcommand(1);

    RunConfig cfg;
    int level_arg = 0;

    auto add_common = [&](CLI::App* sub, bool needs_space, bool needs_map) {
        if (needs_space) sub->add_option("--space", cfg.space_path, "operator space JSON")->required();
        if (needs_map) sub->add_option("--map", cfg.map_path, "space map JSON")->required();
        sub->add_option("--tol", cfg.tol, "tolerance, in (0, 1e-2]");
        sub->add_option("--seed", cfg.seed, "seed for randomized routines");
        sub->add_option("--level", level_arg, "amplification level");
        sub->add_option("--format", cfg.format, "json or text")
            ->check(CLI::IsMember({"json", "text"}));
    };

    add_common(app.add_subcommand("cbnorm", "complete contractivity certificate"), false, true);
    add_common(app.add_subcommand("envelope", "C*-envelope of a unital space"), true, false);
    add_common(app.add_subcommand("decompose", "Banach-Stone decomposition"), false, true);
    add_common(app.add_subcommand("check-isometry", "complete isometry test"), false, true);
    add_common(app.add_subcommand("blockdecomp", "generated algebra block profile"), true, false);

    CLI11_PARSE(app, argc, argv);

    cfg.command = app.get_subcommands().front()->get_name();
    if (level_arg != 0) cfg.level = level_arg;

    try {
        if (!(cfg.tol > 0.0 && cfg.tol <= 1e-2)) throw Error("tol must lie in (0, 1e-2]");
        if (cfg.level && *cfg.level < 1) throw Error("level must be >= 1");
        if (cfg.command == "cbnorm") return run_cbnorm(cfg);
        if (cfg.command == "envelope") return run_envelope(cfg);
        if (cfg.command == "decompose") return run_decompose(cfg);
        if (cfg.command == "check-isometry") return run_check_isometry(cfg);
        if (cfg.command == "blockdecomp") return run_blockdecomp(cfg);
        throw Error("unknown command");
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
}
