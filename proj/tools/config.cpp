#include "config.hpp"

#include <fstream>
#include <sstream>

#include "gridfit/errors.hpp"
#include "json.hpp"

namespace gridfit::cli {

using nlohmann::json;

namespace {

double num(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw ConfigError(std::string("config: '") + key + "' must be a number");
    return j.at(key).get<double>();
}

int integer(const json& j, const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number_integer())
        throw ConfigError(std::string("config: '") + key + "' must be an integer");
    return j.at(key).get<int>();
}

VoltVarCurve parse_curve(const json& j) {
    VoltVarCurve c;
    c.v_low = num(j, "v_low", c.v_low);
    c.v1 = num(j, "v1", c.v1);
    c.v2 = num(j, "v2", c.v2);
    c.v3 = num(j, "v3", c.v3);
    c.v4 = num(j, "v4", c.v4);
    c.v_high = num(j, "v_high", c.v_high);
    c.q1 = num(j, "q1_kvar", c.q1);
    c.q2 = num(j, "q2_kvar", c.q2);
    c.q3 = num(j, "q3_kvar", c.q3);
    c.q4 = num(j, "q4_kvar", c.q4);
    c.validate();
    return c;
}

PlantParams parse_plant(const json& j) {
    PlantParams p;
    p.s_rating_kva = num(j, "s_rating_kva", p.s_rating_kva);
    p.pll_bandwidth_rad_s = num(j, "pll_bandwidth_rad_s", p.pll_bandwidth_rad_s);
    p.current_loop_tau_s = num(j, "current_loop_tau_s", p.current_loop_tau_s);
    p.v_base_v = num(j, "v_base_v", p.v_base_v);
    p.noise_amplitude_a = num(j, "noise_amplitude_a", p.noise_amplitude_a);
    if (j.contains("volt_var_enabled")) p.volt_var_enabled = j.at("volt_var_enabled").get<bool>();
    if (j.contains("output_channel")) {
        const std::string ch = j.at("output_channel").get<std::string>();
        if (ch == "reactive_current") p.channel = OutputChannel::reactive_current;
        else if (ch == "current_magnitude") p.channel = OutputChannel::current_magnitude;
        else throw ConfigError("config: unknown output_channel '" + ch + "'");
    }
    if (j.contains("curve")) p.curve = parse_curve(j.at("curve"));
    p.validate();
    return p;
}

ChirpSpec parse_chirp(const json& j) {
    ChirpSpec c;
    c.f0_hz = num(j, "f0_hz", c.f0_hz);
    c.f1_hz = num(j, "f1_hz", c.f1_hz);
    c.duration_s = num(j, "duration_s", c.duration_s);
    c.phi0_rad = num(j, "phi0_rad", c.phi0_rad);
    c.sample_rate_hz = num(j, "sample_rate_hz", c.sample_rate_hz);
    c.validate();
    return c;
}

SearchConfig parse_search(const json& j, const ChirpSpec& chirp) {
    SearchConfig s;
    s.chirp = chirp;
    s.n_min = integer(j, "n_min", s.n_min);
    s.n_max = integer(j, "n_max", s.n_max);
    s.fit_req = num(j, "fit_req_percent", s.fit_req);
    s.v_low = num(j, "v_low_pu", s.v_low);
    s.v_max = num(j, "v_max_pu", s.v_max);
    s.max_order_n = integer(j, "max_order_n", s.max_order_n);
    s.max_order_m = integer(j, "max_order_m", s.max_order_m);
    s.split = num(j, "split", s.split);
    s.probe_p_avail_kw = num(j, "probe_p_avail_kw", s.probe_p_avail_kw);
    s.sim_dt = num(j, "sim_dt_s", s.sim_dt);
    s.settle_time_s = num(j, "settle_time_s", s.settle_time_s);
    s.validate();
    return s;
}

LineSegment parse_line(const json& j, LineSegment::Kind kind) {
    LineSegment seg;
    seg.kind = kind;
    seg.length_km = num(j, "length_km", seg.length_km);
    seg.r_ohm_per_km = num(j, "r_ohm_per_km", seg.r_ohm_per_km);
    seg.l_mh_per_km = num(j, "l_mh_per_km", seg.l_mh_per_km);
    seg.c_uf_per_km = num(j, "c_uf_per_km", seg.c_uf_per_km);
    seg.validate();
    return seg;
}

ZipLoad parse_zip(const json& j) {
    const double p0 = num(j, "p0_kw", 1.0);
    const double q0 = num(j, "q0_kvar", 0.33);
    if (j.contains("stratum")) {
        const std::string s = j.at("stratum").get<std::string>();
        if (s.size() != 1) throw ConfigError("config: zip stratum must be a single letter");
        return zip_stratum(s[0], p0, q0);
    }
    ZipLoad z;
    z.p0_kw = p0;
    z.q0_kvar = q0;
    z.zp = num(j, "zp", z.zp);
    z.ip = num(j, "ip", z.ip);
    z.pp = num(j, "pp", z.pp);
    z.zq = num(j, "zq", z.zq);
    z.iq = num(j, "iq", z.iq);
    z.pq = num(j, "pq", z.pq);
    z.v0_pu = num(j, "v0_pu", z.v0_pu);
    z.validate();
    return z;
}

FeederCase parse_feeder(const json& j, const PlantParams& plant,
                        const std::filesystem::path& base_dir) {
    FeederCase c;
    c.plant = plant;
    c.source_v_pu = num(j, "source_v_pu", c.source_v_pu);
    c.source_series_r_pu = num(j, "source_series_r_pu", c.source_series_r_pu);
    c.source_series_x_pu = num(j, "source_series_x_pu", c.source_series_x_pu);
    c.frequency_hz = num(j, "frequency_hz", c.frequency_hz);
    c.timestep_s = num(j, "timestep_s", c.timestep_s);
    c.device_dt_s = num(j, "device_dt_s", c.device_dt_s);

    if (j.contains("transformer")) {
        const json& t = j.at("transformer");
        c.transformer.rating_kva = num(t, "rating_kva", c.transformer.rating_kva);
        c.transformer.v_primary_kv = num(t, "v_primary_kv", c.transformer.v_primary_kv);
        c.transformer.v_secondary_v = num(t, "v_secondary_v", c.transformer.v_secondary_v);
        c.transformer.r1_pu = num(t, "r1_pu", c.transformer.r1_pu);
        c.transformer.x1_pu = num(t, "x1_pu", c.transformer.x1_pu);
        c.transformer.r2_pu = num(t, "r2_pu", c.transformer.r2_pu);
        c.transformer.x2_pu = num(t, "x2_pu", c.transformer.x2_pu);
        c.transformer.rm_pu = num(t, "rm_pu", c.transformer.rm_pu);
        c.transformer.xm_pu = num(t, "xm_pu", c.transformer.xm_pu);
        c.transformer.validate();
    }

    const int n_spans = integer(j, "backbone_spans", 5);
    LineSegment backbone{0.02, 0.346, 0.24, 0.072, LineSegment::Kind::backbone};
    if (j.contains("backbone")) backbone = parse_line(j.at("backbone"), LineSegment::Kind::backbone);
    c.backbone.assign(static_cast<std::size_t>(n_spans), backbone);

    House tpl;
    tpl.drop = LineSegment{0.02, 0.549, 0.23, 0.055, LineSegment::Kind::drop};
    if (j.contains("house")) {
        const json& h = j.at("house");
        if (h.contains("drop")) tpl.drop = parse_line(h.at("drop"), LineSegment::Kind::drop);
        if (h.contains("zip")) tpl.zip = parse_zip(h.at("zip"));
        tpl.pv_area_m2 = num(h, "pv_area_m2", tpl.pv_area_m2);
        tpl.pv_efficiency = num(h, "pv_efficiency", tpl.pv_efficiency);
    }
    const int n_houses = integer(j, "n_houses", 12);
    c.houses.assign(static_cast<std::size_t>(n_houses), tpl);

    if (j.contains("profiles")) {
        const json& p = j.at("profiles");
        const auto resolve = [&](const std::string& rel) {
            std::filesystem::path path(rel);
            if (path.is_relative()) path = base_dir / path;
            if (!std::filesystem::exists(path))
                throw ConfigError("config: profile file not found: " + path.string());
            return path;
        };
        const auto load_csv = resolve(p.at("load_csv").get<std::string>());
        const auto irr_csv = resolve(p.at("irradiance_csv").get<std::string>());
        c.profiles = ingest_profiles(load_csv, irr_csv, c.timestep_s);
    }
    c.validate();
    return c;
}

}  // namespace

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();

    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error in " + path.string() + ": " + e.what());
    }

    RunConfig cfg;
    cfg.config_hash = fnv1a_hex(text);
    if (doc.contains("plant")) cfg.plant = parse_plant(doc.at("plant"));
    ChirpSpec chirp;
    if (doc.contains("chirp")) chirp = parse_chirp(doc.at("chirp"));
    cfg.search = parse_search(doc.contains("search") ? doc.at("search") : json::object(), chirp);
    if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
    cfg.plant.noise_seed = cfg.seed;
    if (doc.contains("output_dir")) cfg.output_dir = doc.at("output_dir").get<std::string>();

    const auto base_dir = path.has_parent_path() ? path.parent_path()
                                                 : std::filesystem::path(".");
    if (doc.contains("feeder")) cfg.feeder = parse_feeder(doc.at("feeder"), cfg.plant, base_dir);
    return cfg;
}

}  // namespace gridfit::cli
