#include "model_store.hpp"

#include <fstream>

#include "gridfit/errors.hpp"
#include "json.hpp"

namespace gridfit::cli {

using nlohmann::json;

void ModelStore::save(const std::filesystem::path& path) const {
    json doc;
    doc["kind"] = "gridfit-partitioned-model";
    doc["schema_version"] = kSchemaVersion;
    doc["v_low_pu"] = model.v_low;
    doc["v_max_pu"] = model.v_max;
    doc["ts_s"] = model.ts;
    doc["overall_fit_percent"] = model.overall_fit;
    doc["provenance"] = {{"config_hash", config_hash}, {"created_unix_s", created_unix_s}};
    json ranges = json::array();
    for (const auto& r : model.ranges) {
        ranges.push_back({{"v_lo", r.v_lo},
                          {"v_hi", r.v_hi},
                          {"b", r.tf.b},
                          {"a", r.tf.a},
                          {"ts_s", r.tf.ts},
                          {"u_offset", r.u_offset},
                          {"y_offset", r.y_offset},
                          {"fit_percent", r.report.fit_percent},
                          {"nrmse", r.report.nrmse},
                          {"adj_r2", r.report.adj_r2},
                          {"aicc", r.report.aicc},
                          {"bic", r.report.bic},
                          {"n_params", r.report.n_params},
                          {"n_points", r.report.n_points}});
    }
    doc["ranges"] = std::move(ranges);

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write model store: " + path.string());
    out << doc.dump(2) << '\n';
}

ModelStore ModelStore::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open model store: " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("model store parse error in " + path.string() + ": " + e.what());
    }
    if (!doc.contains("kind") || doc.at("kind") != "gridfit-partitioned-model")
        throw ConfigError("not a model store document: " + path.string());
    if (doc.at("schema_version").get<int>() != kSchemaVersion)
        throw ConfigError("unsupported model store schema version in " + path.string());

    ModelStore store;
    store.config_hash = doc.at("provenance").at("config_hash").get<std::string>();
    store.created_unix_s = doc.at("provenance").at("created_unix_s").get<std::int64_t>();
    store.model.v_low = doc.at("v_low_pu").get<double>();
    store.model.v_max = doc.at("v_max_pu").get<double>();
    store.model.ts = doc.at("ts_s").get<double>();
    store.model.overall_fit = doc.at("overall_fit_percent").get<double>();
    for (const auto& r : doc.at("ranges")) {
        RangeModel range;
        range.v_lo = r.at("v_lo").get<double>();
        range.v_hi = r.at("v_hi").get<double>();
        range.tf.b = r.at("b").get<std::vector<double>>();
        range.tf.a = r.at("a").get<std::vector<double>>();
        range.tf.ts = r.at("ts_s").get<double>();
        range.u_offset = r.at("u_offset").get<double>();
        range.y_offset = r.at("y_offset").get<double>();
        range.report.fit_percent = r.at("fit_percent").get<double>();
        range.report.nrmse = r.at("nrmse").get<double>();
        range.report.adj_r2 = r.at("adj_r2").get<double>();
        range.report.aicc = r.at("aicc").get<double>();
        range.report.bic = r.at("bic").get<double>();
        range.report.n_params = r.at("n_params").get<int>();
        range.report.n_points = r.at("n_points").get<int>();
        store.model.ranges.push_back(std::move(range));
    }
    store.model.validate();
    return store;
}

}  // namespace gridfit::cli
