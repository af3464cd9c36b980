#include "sboltz/diagnostics_io.hpp"

#include <openssl/evp.h>

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "sboltz/errors.hpp"

namespace sboltz {

using nlohmann::json;

namespace {

constexpr double kTwoPi = 6.28318530717958647692;
constexpr char kMagic[8] = {'S', 'B', 'O', 'L', 'T', 'Z', 'T', '1'};
constexpr std::uint32_t kBinaryVersion = 1;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path + " for reading");
    return std::string(std::istreambuf_iterator<char>(in), {});
}

void spit(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(bytes.data(), std::streamsize(bytes.size()));
    if (!out) throw IoError("write failed for " + path);
}

// Little-endian encoder/decoder for the table payload.
struct Writer {
    std::string buf;
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf.push_back(char((v >> (8 * i)) & 0xff));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf.push_back(char((v >> (8 * i)) & 0xff));
    }
    void i32(int v) { u32(std::uint32_t(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
};

struct Reader {
    const std::string& buf;
    std::size_t pos = 0;
    void need(std::size_t n) {
        if (buf.size() - pos < n) throw MalformedFileError("table file truncated");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(std::uint8_t(buf[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(std::uint8_t(buf[pos + i])) << (8 * i);
        pos += 8;
        return v;
    }
    int i32() { return int(u32()); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::size_t count(std::size_t entry_bytes) {
        std::uint64_t n = u64();
        if (entry_bytes && n > (buf.size() - pos) / entry_bytes) throw MalformedFileError("table section count too large");
        return std::size_t(n);
    }
};

template <std::size_t K>
void put_map(Writer& w, const std::map<std::array<int, K>, double>& m) {
    w.u64(m.size());
    for (const auto& [key, v] : m) {
        for (int x : key) w.i32(x);
        w.f64(v);
    }
}

template <std::size_t K>
void get_map(Reader& r, std::map<std::array<int, K>, double>& m) {
    std::size_t n = r.count(4 * K + 8);
    for (std::size_t i = 0; i < n; ++i) {
        std::array<int, K> key;
        for (int& x : key) x = r.i32();
        m[key] = r.f64();
    }
}

std::string payload(const CoeffTable& t) {
    Writer w;
    w.f64(t.params.s);
    w.f64(t.params.kappa_beta);
    w.i32(int(t.params.model));
    w.f64(t.spec.rel_tol);
    w.i32(t.spec.max_levels);
    w.f64(t.spec.grading_ratio);
    w.i32(t.spec.panel_order);
    w.i32(t.spec.sphere_degree_margin);
    w.i32(t.n_max_energy);
    put_map(w, t.linear);
    put_map(w, t.lin1);
    put_map(w, t.lin2);
    put_map(w, t.rad1);
    put_map(w, t.rad2);
    w.u64(t.mu.size());
    for (const auto& [k, v] : t.mu) {
        for (int x : {k.n, k.nt, k.l, k.lt, k.k, k.m, k.mt}) w.i32(x);
        w.f64(v.real());
        w.f64(v.imag());
    }
    return std::move(w.buf);
}

CoeffTable decode_payload(const std::string& bytes, std::size_t start) {
    Reader r{bytes, start};
    CoeffTable t;
    t.params.s = r.f64();
    t.params.kappa_beta = r.f64();
    int model = r.i32();
    if (model != int(KernelModel::power_law)) throw MalformedFileError("unknown kernel model in table");
    t.params.model = KernelModel(model);
    t.spec.rel_tol = r.f64();
    t.spec.max_levels = r.i32();
    t.spec.grading_ratio = r.f64();
    t.spec.panel_order = r.i32();
    t.spec.sphere_degree_margin = r.i32();
    t.n_max_energy = r.i32();
    get_map(r, t.linear);
    get_map(r, t.lin1);
    get_map(r, t.lin2);
    get_map(r, t.rad1);
    get_map(r, t.rad2);
    std::size_t n = r.count(7 * 4 + 16);
    for (std::size_t i = 0; i < n; ++i) {
        MuKey k;
        k.n = r.i32(), k.nt = r.i32(), k.l = r.i32(), k.lt = r.i32(), k.k = r.i32(), k.m = r.i32(), k.mt = r.i32();
        double re = r.f64();
        t.mu[k] = {re, r.f64()};
    }
    if (r.pos != bytes.size()) throw MalformedFileError("trailing bytes after table payload");
    return t;
}

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw IoError("SHA-256 computation failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 15]);
    }
    return out;
}

json params_json(const CoeffTable& t) {
    return json{{"s", t.params.s},
                {"kappa_beta", t.params.kappa_beta},
                {"model", "power_law"},
                {"quadrature",
                 {{"rel_tol", t.spec.rel_tol},
                  {"max_levels", t.spec.max_levels},
                  {"grading_ratio", t.spec.grading_ratio},
                  {"panel_order", t.spec.panel_order},
                  {"sphere_degree_margin", t.spec.sphere_degree_margin}}},
                {"n_max_energy", t.n_max_energy}};
}

template <std::size_t K>
json map_json(const std::map<std::array<int, K>, double>& m) {
    json a = json::array();
    for (const auto& [key, v] : m) {
        json row = json::array();
        for (int x : key) row.push_back(x);
        row.push_back(v);
        a.push_back(std::move(row));
    }
    return a;
}

template <std::size_t K>
void map_from_json(const json& a, std::map<std::array<int, K>, double>& m) {
    for (const json& row : a) {
        if (!row.is_array() || row.size() != K + 1) throw MalformedFileError("bad table row");
        std::array<int, K> key;
        for (std::size_t i = 0; i < K; ++i) key[i] = row[i].get<int>();
        m[key] = row[K].get<double>();
    }
}

std::string table_json_text(const CoeffTable& t) {
    json j;
    j["format"] = t.version;
    j["params"] = params_json(t);
    j["digest"] = table_digest(t);
    j["linear"] = map_json(t.linear);
    j["lin1"] = map_json(t.lin1);
    j["lin2"] = map_json(t.lin2);
    j["rad1"] = map_json(t.rad1);
    j["rad2"] = map_json(t.rad2);
    json mu = json::array();
    for (const auto& [k, v] : t.mu) mu.push_back({k.n, k.nt, k.l, k.lt, k.k, k.m, k.mt, v.real(), v.imag()});
    j["mu"] = std::move(mu);
    return j.dump(1) + "\n";
}

CoeffTable table_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw MalformedFileError(std::string("table JSON does not parse: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != kTableFormatVersion)
            throw VersionMismatchError("table format " + j.at("format").get<std::string>() + ", expected " +
                                       kTableFormatVersion);
        CoeffTable t;
        const json& p = j.at("params");
        t.params.s = p.at("s").get<double>();
        t.params.kappa_beta = p.at("kappa_beta").get<double>();
        if (p.at("model").get<std::string>() != "power_law") throw MalformedFileError("unknown kernel model");
        const json& q = p.at("quadrature");
        t.spec.rel_tol = q.at("rel_tol").get<double>();
        t.spec.max_levels = q.at("max_levels").get<int>();
        t.spec.grading_ratio = q.at("grading_ratio").get<double>();
        t.spec.panel_order = q.at("panel_order").get<int>();
        t.spec.sphere_degree_margin = q.at("sphere_degree_margin").get<int>();
        t.n_max_energy = p.at("n_max_energy").get<int>();
        map_from_json(j.at("linear"), t.linear);
        map_from_json(j.at("lin1"), t.lin1);
        map_from_json(j.at("lin2"), t.lin2);
        map_from_json(j.at("rad1"), t.rad1);
        map_from_json(j.at("rad2"), t.rad2);
        for (const json& row : j.at("mu")) {
            if (!row.is_array() || row.size() != 9) throw MalformedFileError("bad mu row");
            MuKey k{row[0].get<int>(), row[1].get<int>(), row[2].get<int>(), row[3].get<int>(),
                    row[4].get<int>(), row[5].get<int>(), row[6].get<int>()};
            t.mu[k] = {row[7].get<double>(), row[8].get<double>()};
        }
        if (table_digest(t) != j.at("digest").get<std::string>())
            throw DigestMismatchError("table digest does not match its contents");
        return t;
    } catch (const json::exception& e) {
        throw MalformedFileError(std::string("table JSON is missing fields: ") + e.what());
    }
}

}  // namespace

void VelocityGrid::validate() const {
    if (!(extent > 0.0)) throw DomainError("velocity grid extent must be positive");
    if (points_per_axis < 2) throw DomainError("velocity grid needs at least 2 points per axis");
}

double maxwellian(const Vec3& v) {
    double r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    return std::pow(kTwoPi, -1.5) * std::exp(-0.5 * r2);
}

DensityField reconstruct_f(const SpectralState& state, const VelocityGrid& grid) {
    grid.validate();
    struct Term {
        int radial;  // index into the (n,l) list
        int l, m;
        cplx c;
    };
    std::vector<std::pair<int, int>> radials;
    std::vector<Term> terms;
    int lmax = -1;
    for (const auto& [mode, c] : state.coeffs) {
        if (c == 0.0) continue;
        if (!mode.valid()) throw IndexError("reconstruct_f: invalid mode " + to_string(mode));
        std::pair<int, int> nl{mode.n, mode.l};
        int idx = -1;
        for (std::size_t i = 0; i < radials.size(); ++i)
            if (radials[i] == nl) idx = int(i);
        if (idx < 0) {
            idx = int(radials.size());
            radials.push_back(nl);
        }
        terms.push_back({idx, mode.l, mode.m, c});
        lmax = std::max(lmax, mode.l);
    }

    const int P = grid.points_per_axis;
    DensityField out;
    out.grid = grid;
    out.values.resize(std::size_t(P) * P * P);
    std::vector<double> rad(radials.size());
    std::vector<std::vector<cplx>> rows(std::size_t(lmax + 1));
    for (int l = 0; l <= lmax; ++l) rows[l].resize(2 * l + 1);
    std::size_t pos = 0;
    for (int i = 0; i < P; ++i)
        for (int j = 0; j < P; ++j)
            for (int k = 0; k < P; ++k, ++pos) {
                Vec3 v{grid.coord(i), grid.coord(j), grid.coord(k)};
                double r = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
                Vec3 u = r > 0.0 ? Vec3{v[0] / r, v[1] / r, v[2] / r} : Vec3{1.0, 0.0, 0.0};
                for (std::size_t q = 0; q < radials.size(); ++q) rad[q] = phi_radial(radials[q].first, radials[q].second, r);
                for (int l = 0; l <= lmax; ++l) sph_harm_row(l, u, rows[l].data());
                cplx g = 0.0;
                for (const Term& t : terms) g += t.c * rad[t.radial] * rows[t.l][t.m + t.l];
                const double sm = sqrt_maxwellian(v);
                out.values[pos] = maxwellian(v) + sm * g.real();
                out.max_imag_residual = std::max(out.max_imag_residual, std::abs(sm * g.imag()));
            }
    return out;
}

double field_integral(const DensityField& field) {
    const int P = field.grid.points_per_axis;
    const double h = field.grid.spacing();
    auto w = [P](int i) { return (i == 0 || i == P - 1) ? 0.5 : 1.0; };
    double acc = 0.0;
    for (int i = 0; i < P; ++i)
        for (int j = 0; j < P; ++j)
            for (int k = 0; k < P; ++k) acc += w(i) * w(j) * w(k) * field.at(i, j, k);
    return acc * h * h * h;
}

std::string table_digest(const CoeffTable& table) { return sha256_hex(table.version + '\0' + payload(table)); }

std::string table_to_bytes(const CoeffTable& table, TableFormat format) {
    if (format == TableFormat::json) return table_json_text(table);
    const std::string body = payload(table);
    json header = params_json(table);
    header["format"] = table.version;
    header["digest"] = table_digest(table);
    header["counts"] = {{"linear", table.linear.size()}, {"mu", table.mu.size()},
                        {"rad1", table.rad1.size()}, {"rad2", table.rad2.size()}};
    const std::string htext = header.dump();
    Writer w;
    w.buf.append(kMagic, sizeof kMagic);
    w.u32(kBinaryVersion);
    w.u64(htext.size());
    w.buf += htext;
    w.buf += body;
    return std::move(w.buf);
}

CoeffTable table_from_bytes(const std::string& bytes) {
    if (bytes.empty()) throw MalformedFileError("table file is empty");
    if (bytes[0] == '{') return table_from_json_text(bytes);
    if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
        throw MalformedFileError("not a table file (bad magic)");
    Reader r{bytes, sizeof kMagic};
    std::uint32_t ver = r.u32();
    if (ver != kBinaryVersion)
        throw VersionMismatchError("binary table layout version " + std::to_string(ver) + ", expected " +
                                   std::to_string(kBinaryVersion));
    std::uint64_t hlen = r.u64();
    r.need(hlen);
    json header;
    try {
        header = json::parse(bytes.substr(r.pos, hlen));
    } catch (const json::exception& e) {
        throw MalformedFileError(std::string("table header does not parse: ") + e.what());
    }
    if (!header.contains("format") || !header["format"].is_string() || !header.contains("digest"))
        throw MalformedFileError("table header lacks format or digest");
    if (header["format"].get<std::string>() != kTableFormatVersion)
        throw VersionMismatchError("table format " + header["format"].get<std::string>() + ", expected " +
                                   kTableFormatVersion);
    CoeffTable t = decode_payload(bytes, r.pos + hlen);
    if (table_digest(t) != header["digest"].get<std::string>())
        throw DigestMismatchError("table digest does not match its contents");
    return t;
}

void write_table(const CoeffTable& table, const std::string& path, TableFormat format) {
    spit(path, table_to_bytes(table, format));
}

CoeffTable read_table(const std::string& path) { return table_from_bytes(slurp(path)); }

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

Series series_from_run(const IntegrationResult& run) {
    Series s;
    s.times = run.report.times;
    s.states = run.trajectory;
    s.monitors = {{"l2_norm", run.report.l2_norm},
                  {"dissipation", run.report.dissipation_integral},
                  {"weighted_norm", run.report.weighted_norm},
                  {"decay_margin", run.report.decay_bound_margin}};
    return s;
}

std::string series_csv(const Series& series, const std::vector<ModeIndex>& modes) {
    std::ostringstream os;
    os << "t";
    for (const ModeIndex& m : modes) os << ",re:" << m.n << ':' << m.l << ':' << m.m << ",im:" << m.n << ':' << m.l << ':' << m.m;
    for (const auto& [name, col] : series.monitors) os << ',' << name;
    os << '\n';
    for (std::size_t r = 0; r < series.times.size(); ++r) {
        os << format_double(series.times[r]);
        for (const ModeIndex& m : modes) {
            cplx c = series.states.at(r).get(m);
            os << ',' << format_double(c.real()) << ',' << format_double(c.imag());
        }
        for (const auto& [name, col] : series.monitors) os << ',' << format_double(col.at(r));
        os << '\n';
    }
    return os.str();
}

void write_series(const Series& series, const std::vector<ModeIndex>& modes, const std::string& path) {
    spit(path, series_csv(series, modes));
}

void write_report(const json& report, const std::string& path) { spit(path, report.dump(2) + "\n"); }

SpectralState parse_init(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw MalformedFileError(std::string("init data does not parse: ") + e.what());
    }
    if (!j.is_object()) throw MalformedFileError("init data must be a JSON object");
    SpectralState st;
    for (const auto& [key, val] : j.items()) {
        ModeIndex mode;
        char c1 = 0, c2 = 0;
        std::istringstream ks(key);
        if (!(ks >> mode.n >> c1 >> mode.l >> c2 >> mode.m) || c1 != ',' || c2 != ',' || !(ks >> std::ws).eof())
            throw MalformedFileError("init key '" + key + "' is not of the form n,l,m");
        if (!mode.valid()) throw IndexError("init data names invalid mode " + to_string(mode));
        cplx c;
        if (val.is_number()) {
            c = val.get<double>();
        } else if (val.is_array() && val.size() == 2 && val[0].is_number() && val[1].is_number()) {
            c = {val[0].get<double>(), val[1].get<double>()};
        } else {
            throw MalformedFileError("init value for " + key + " must be [re, im] or a number");
        }
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
            throw MalformedFileError("init value for " + key + " is not finite");
        st.coeffs[mode] = c;
    }
    require_admissible(st);
    st.reality_flag = st.reality_defect() == 0.0;
    return st;
}

SpectralState read_init(const std::string& path) { return parse_init(slurp(path)); }

json init_to_json(const SpectralState& state) {
    json j = json::object();
    for (const auto& [mode, c] : state.coeffs)
        j[std::to_string(mode.n) + "," + std::to_string(mode.l) + "," + std::to_string(mode.m)] = {c.real(), c.imag()};
    return j;
}

}  // namespace sboltz
