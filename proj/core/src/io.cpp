#include "fklab/io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fklab {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json vec_json(const Vec& x, int dim) {
    ordered_json a = ordered_json::array();
    for (int d = 0; d < dim; ++d) a.push_back(x[static_cast<std::size_t>(d)]);
    return a;
}

ordered_json ball_json(const BallSpec& b, int dim) {
    ordered_json j;
    j["center"] = vec_json(b.center, dim);
    j["radius"] = b.radius;
    return j;
}

}  // namespace

std::string certificate_to_json(const Certificate& c) {
    ordered_json j;
    j["schema_version"] = c.schema_version;
    j["key"] = c.key;
    j["kind"] = c.kind;
    j["domain"] = c.domain_name;
    j["dim"] = c.dim;
    j["h"] = c.h;
    j["eta"] = c.eta;
    j["potential_source"] = c.potential_source;
    {
        ordered_json cal;
        cal["scale"] = c.calibration_scale;
        cal["mu"] = c.calibration_mu;
        j["calibration"] = cal;
    }
    j["lambda1"] = c.lambda1;
    j["x0"] = vec_json(c.x0, c.dim);
    j["sign_branch"] = c.sign_branch;
    {
        ordered_json et;
        et["median"] = c.median_exit_time;
        et["bracket"] = ordered_json::array({c.t_bracket_lo, c.t_bracket_hi});
        j["exit_time"] = et;
    }
    {
        ordered_json nm;
        nm["kind"] = c.norm_kind;
        nm["value"] = c.norm_value;
        nm["radius_constant"] = c.radius_constant;
        nm["threshold"] = c.threshold;
        j["norm"] = nm;
    }
    j["ball"] = ball_json(c.ball, c.dim);
    {
        ordered_json bv = ball_json(c.ball_vol, c.dim);
        bv["value"] = c.norm_value_vol;
        j["ball_volume_variant"] = bv;
    }
    if (c.kind == "T3") {
        ordered_json d;
        d["hypothesis_holds"] = c.hypothesis_holds;
        d["intersection_fraction"] = c.intersection_fraction;
        d["fraction_bound"] = c.fraction_bound;
        j["dichotomy"] = d;
    }
    if (c.chain.T > 0) {
        ordered_json ch;
        ch["T"] = c.chain.T;
        ch["survival_at_T"] = c.chain.survival_at_T;
        ch["fk_value_at_T"] = c.chain.fk_value_at_T;
        ch["fk_min_to_2T"] = c.chain.fk_min_to_2T;
        ch["exp_moment_2v"] = c.chain.exp_moment_2v;
        ch["khasminskii_alpha_2v"] = c.chain.khas_alpha_2v;
        ch["khasminskii_deficit"] = c.chain.khas_deficit;
        ch["khasminskii_pad"] = c.chain.khas_pad;
        j["chain"] = ch;
    }
    {
        ordered_json b;
        b["lambda1"] = c.baselines.lambda1;
        b["volume"] = c.baselines.volume;
        b["fk_classical_constant"] = c.baselines.fk_classical_constant;
        b["fk_product"] = c.baselines.fk_product;
        b["lambda1_lower_bound"] = c.baselines.lambda1_lower_bound;
        b["vmax"] = c.baselines.vmax;
        b["barta_gap"] = c.baselines.barta_gap;
        b["r_exponent"] = c.baselines.r_exponent;
        b["lr_norm"] = c.baselines.lr_norm;
        b["global_product"] = c.baselines.global_product;
        b["global_rhs_scale"] = c.baselines.global_rhs_scale;
        j["baselines"] = b;
    }
    {
        ordered_json nu;
        nu["lorentz_normalization"] = c.lorentz_normalization;
        nu["reduction_order"] = c.reduction_order;
        ordered_json t;
        t["eig_rel_tol"] = c.tol.eig_rel_tol;
        t["calib_rel_tol"] = c.tol.calib_rel_tol;
        t["cg_tol"] = c.tol.cg_tol;
        t["theta"] = c.tol.theta;
        t["chain_slack"] = c.tol.chain_slack;
        nu["tolerances"] = t;
        j["numerics"] = nu;
    }
    j["verdict"] = c.verdict;
    j["notes"] = c.notes;
    return j.dump(2) + "\n";
}

void write_certificate(const Certificate& cert, const std::string& path) {
    write_text_file(path, certificate_to_json(cert));
}

CertSummary summarize_certificate_file(const std::string& path) {
    CertSummary s;
    s.file = path;
    try {
        const ordered_json j = ordered_json::parse(read_text_file(path));
        s.key = j.at("key").get<std::string>();
        s.kind = j.at("kind").get<std::string>();
        s.domain = j.at("domain").get<std::string>();
        s.verdict = j.at("verdict").get<std::string>();
        s.h = j.at("h").get<double>();
        s.eta = j.at("eta").get<double>();
        s.T = j.at("exit_time").at("median").get<double>();
        s.norm_value = j.at("norm").at("value").get<double>();
        s.threshold = j.at("norm").at("threshold").get<double>();
    } catch (const std::exception&) {
        s.malformed = true;
    }
    return s;
}

std::vector<CertSummary> report_directory(const std::string& dir) {
    namespace fs = std::filesystem;
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    std::vector<CertSummary> rows;
    rows.reserve(files.size());
    for (const auto& f : files) rows.push_back(summarize_certificate_file(f));
    return rows;
}

std::string render_summary_table(const std::vector<CertSummary>& rows) {
    std::ostringstream os;
    os << std::left << std::setw(34) << "key" << std::setw(6) << "kind" << std::setw(8) << "eta"
       << std::setw(14) << "T" << std::setw(14) << "norm" << std::setw(14) << "threshold"
       << "verdict\n";
    for (const auto& r : rows) {
        if (r.malformed) {
            os << std::left << std::setw(34) << r.file << "MALFORMED\n";
            continue;
        }
        os << std::left << std::setw(34) << r.key << std::setw(6) << r.kind;
        os << std::setw(8) << std::setprecision(3) << r.eta;
        os << std::setw(14) << std::setprecision(6) << r.T;
        os << std::setw(14) << std::setprecision(6) << r.norm_value;
        os << std::setw(14) << std::setprecision(6) << r.threshold;
        os << r.verdict << "\n";
    }
    return os.str();
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ostringstream os;
    for (std::size_t i = 0; i < header.size(); ++i)
        os << header[i] << (i + 1 < header.size() ? "," : "");
    os << "\n";
    char buf[64];
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", row[i]);
            os << buf << (i + 1 < row.size() ? "," : "");
        }
        os << "\n";
    }
    write_text_file(path, os.str());
}

void export_mask(const DomainMask& mask, const std::string& base_path) {
    ordered_json j;
    j["n"] = mask.n;
    {
        ordered_json d = ordered_json::array();
        for (int k = 0; k < mask.n; ++k) d.push_back(mask.dims[static_cast<std::size_t>(k)]);
        j["dims"] = d;
    }
    j["h"] = mask.h;
    j["origin"] = vec_json(mask.origin, mask.n);
    j["cells"] = mask.cells.size();
    write_text_file(base_path + ".json", j.dump(2) + "\n");
    std::string bytes(mask.inside.size(), '\0');
    for (std::size_t i = 0; i < mask.inside.size(); ++i)
        bytes[i] = mask.inside[i] ? '\1' : '\0';
    write_text_file(base_path + ".bin", bytes);
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace fklab
