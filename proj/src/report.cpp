#include "thickpoints/report.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace thickpoints::report {

std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Cell::Cell(std::string s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) {
        text_ = std::move(s);
        return;
    }
    text_ = "\"";
    for (char c : s) {
        if (c == '"') text_ += '"';
        text_ += c;
    }
    text_ += '"';
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
    if (header_.empty()) throw std::invalid_argument("CSV table needs a header");
}

void CsvTable::add_row(std::vector<Cell> cells) {
    if (cells.size() != header_.size()) throw std::invalid_argument("CSV row width does not match the header");
    rows_.push_back(std::move(cells));
}

void CsvTable::write(std::ostream& os) const {
    for (std::size_t i = 0; i < header_.size(); ++i) os << (i ? "," : "") << Cell(header_[i]).text();
    os << '\n';
    for (const auto& row : rows_) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i].text();
        os << '\n';
    }
}

std::string CsvTable::str() const {
    std::ostringstream os;
    write(os);
    return os.str();
}

json to_json(const mc::EstimateReport& r) {
    json j;
    j["estimator"] = r.estimator;
    j["n"] = r.n;
    j["estimate"] = r.estimate;
    j["stderr"] = r.stderr_;
    j["ci_95"] = {r.ci_lo, r.ci_hi};
    j["target"] = r.target ? json(*r.target) : json(nullptr);
    j["abs_tol"] = r.abs_tol;
    j["z"] = r.z;
    j["verdict"] = mc::to_string(r.verdict);
    return j;
}

std::string sha256_hex(std::string_view data) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 || EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
        throw std::runtime_error("SHA-256 computation failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

OutputSet::OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

void OutputSet::write(const std::string& name, const std::string& content) {
    if (sealed_) throw std::logic_error("output set already has its manifest");
    const auto path = dir_ / name;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    os << content;
    if (!os) throw std::runtime_error("cannot write " + path.string());
    files_.push_back(name);
    digests_.push_back(sha256_hex(content));
    sizes_.push_back(content.size());
}

void OutputSet::write_json(const std::string& name, const json& doc) { write(name, doc.dump(2) + "\n"); }

void OutputSet::write_csv(const std::string& name, const CsvTable& table) { write(name, table.str()); }

void OutputSet::write_manifest(const json& config, std::uint64_t seed, const json& timing) {
    json m;
    m["schema"] = kManifestSchema;
    m["tool_version"] = kToolVersion;
    m["config"] = config;
    m["master_seed"] = seed;
    json files = json::array();
    for (std::size_t i = 0; i < files_.size(); ++i)
        files.push_back({{"name", files_[i]}, {"sha256", digests_[i]}, {"bytes", sizes_[i]}});
    m["files"] = files;
    m["timing"] = timing;
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    m["created"] = stamp;
    const auto path = dir_ / "manifest.json";
    std::ofstream os(path, std::ios::binary);
    os << m.dump(2) << "\n";
    if (!os) throw std::runtime_error("cannot write " + path.string());
    sealed_ = true;
}

} // namespace thickpoints::report
