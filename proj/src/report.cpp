#include "tppi/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "json.hpp"
#include "tppi/csv.hpp"
#include "tppi/errors.hpp"
#include "tppi/ingest.hpp"

namespace tppi::report {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    out << content;
    out.flush();
    if (!out) {
        throw IoError("failed while writing " + path);
    }
}

void ensure_out_dir(const RunConfig& config) {
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec) {
        throw IoError("cannot create output directory " + config.out_dir + ": " + ec.message());
    }
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

json parse_json_file(const std::string& path, const char* what) {
    if (!fs::exists(path)) {
        throw IoError(std::string("no ") + what + " at " + path);
    }
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw IoError("malformed " + std::string(what) + " " + path + ": " + e.what());
    }
}

json series_to_json(const Series& series) {
    return json{{"start_year", series.start_year()}, {"values", series.values()}};
}

Series series_from_json(const json& j) {
    return Series(j.at("start_year").get<int>(), j.at("values").get<std::vector<double>>());
}

regress::ArxConfig arx_config_from_json(const json& j) {
    return {j.at("l").get<int>(), j.at("u").get<int>(), j.at("v").get<int>()};
}

json arx_config_to_json(const regress::ArxConfig& cfg) {
    return json{{"l", cfg.endo_lags}, {"u", cfg.exo_delay}, {"v", cfg.exo_lags}};
}

std::vector<double> to_vector(const Eigen::VectorXd& v) {
    return {v.begin(), v.end()};
}

/// Everything cmd_analyze and cmd_allocate need from the ingest bundle.
struct Dataset {
    std::map<int, Series> rates;
    std::map<int, Series> grants;
    std::map<int, std::string> names;
    std::vector<ingest::SchoolRecord> schools;
};

Dataset load_dataset(const RunConfig& config) {
    const json bundle = parse_json_file(dataset_path(config), "dataset bundle (run ingest first)");
    Dataset data;
    try {
        for (const auto& area : bundle.at("areas")) {
            const int code = area.at("code").get<int>();
            data.names[code] = area.at("name").get<std::string>();
            data.rates.emplace(code, series_from_json(area.at("rates")));
            if (area.contains("grants")) {
                data.grants.emplace(code, series_from_json(area.at("grants")));
            }
        }
        for (const auto& s : bundle.at("schools")) {
            ingest::SchoolRecord rec;
            rec.school_id = s.at("id").get<std::string>();
            rec.name = s.at("name").get<std::string>();
            rec.area_code = s.at("area").get<int>();
            for (const auto& [year, enrolled] : s.at("enrollment").items()) {
                rec.enrollment_by_year[std::stoi(year)] = enrolled.get<long long>();
            }
            data.schools.push_back(std::move(rec));
        }
    } catch (const json::exception& e) {
        throw IoError("malformed dataset bundle " + dataset_path(config) + ": " + e.what());
    }
    return data;
}

std::string area_name(const std::map<int, std::string>& names, int code) {
    const auto it = names.find(code);
    return it == names.end() ? std::string() : it->second;
}

std::string r2_field(const analysis::RSquared& r2) {
    return r2.defined() ? csv::format_double(r2.value()) : std::string();
}

json r2_json(const analysis::RSquared& r2) {
    return r2.defined() ? json(r2.value()) : json(nullptr);
}

std::string config_label(const regress::ArxConfig& cfg) {
    return "l" + std::to_string(cfg.endo_lags) + "v" + std::to_string(cfg.exo_lags);
}

/// Two fixed-scale panels: pooled R² against lag depth, and against the
/// grant-model configurations. Values are clamped to [0, 1] for display.
std::string render_r2_svg(const std::map<int, analysis::SweepEntry>& ar,
                          const std::map<regress::ArxConfig, analysis::SweepEntry>& arx) {
    constexpr double kLeft1 = 60, kLeft2 = 420, kPanelWidth = 280;
    constexpr double kTop = 40, kBottom = 270;

    auto y_of = [&](double r2) {
        const double clamped = std::clamp(r2, 0.0, 1.0);
        return kBottom - (kBottom - kTop) * clamped;
    };
    auto fx = [](double v) { return csv::format_fixed(v, 1); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"320\" "
           "viewBox=\"0 0 720 320\">\n"
        << "<rect width=\"720\" height=\"320\" fill=\"#ffffff\"/>\n";

    auto draw_frame = [&](double left, const std::string& title) {
        svg << "<text x=\"" << fx(left) << "\" y=\"24\" font-family=\"sans-serif\" "
            << "font-size=\"14\" fill=\"#333333\">" << title << "</text>\n";
        for (int i = 0; i <= 4; ++i) {
            const double level = 0.25 * i;
            const double y = y_of(level);
            svg << "<line x1=\"" << fx(left) << "\" y1=\"" << fx(y) << "\" x2=\""
                << fx(left + kPanelWidth) << "\" y2=\"" << fx(y)
                << "\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n"
                << "<text x=\"" << fx(left - 8) << "\" y=\"" << fx(y + 4)
                << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#666666\" "
                << "text-anchor=\"end\">" << csv::format_fixed(level, 2) << "</text>\n";
        }
    };

    draw_frame(kLeft1, "Pooled R^2 by lag depth");
    draw_frame(kLeft2, "Pooled R^2 by grant model");

    auto draw_series = [&](double left, const std::vector<std::string>& labels,
                           const std::vector<analysis::RSquared>& values,
                           const std::string& color) {
        const std::size_t n = labels.size();
        const double step = n > 1 ? kPanelWidth / static_cast<double>(n - 1) : 0.0;
        std::ostringstream points;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = left + step * static_cast<double>(i);
            svg << "<text x=\"" << fx(x) << "\" y=\"" << fx(kBottom + 18)
                << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#666666\" "
                << "text-anchor=\"middle\">" << labels[i] << "</text>\n";
            if (!values[i].defined()) continue;
            const double y = y_of(values[i].value());
            points << (points.tellp() > 0 ? " " : "") << fx(x) << "," << fx(y);
            svg << "<circle cx=\"" << fx(x) << "\" cy=\"" << fx(y) << "\" r=\"3\" fill=\""
                << color << "\"/>\n";
        }
        svg << "<polyline points=\"" << points.str() << "\" fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
    };

    std::vector<std::string> lag_labels;
    std::vector<analysis::RSquared> lag_values;
    for (const auto& [lag, entry] : ar) {
        lag_labels.push_back(std::to_string(lag));
        lag_values.push_back(entry.overall_r2);
    }
    draw_series(kLeft1, lag_labels, lag_values, "#1f77b4");

    std::vector<std::string> cfg_labels;
    std::vector<analysis::RSquared> cfg_values;
    for (const auto& [cfg, entry] : arx) {
        cfg_labels.push_back(config_label(cfg));
        cfg_values.push_back(entry.overall_r2);
    }
    draw_series(kLeft2, cfg_labels, cfg_values, "#d62728");

    svg << "</svg>\n";
    return svg.str();
}

void require_positive_budget(double budget) {
    if (!(budget > 0.0) || !std::isfinite(budget)) {
        throw ConfigError("budget must be a positive dollar amount");
    }
}

}  // namespace

std::vector<int> parse_lag_set(const std::string& text) {
    auto parse_one = [&](const std::string& part) {
        try {
            std::size_t used = 0;
            const int value = std::stoi(part, &used);
            if (used != part.size()) throw std::invalid_argument(part);
            return value;
        } catch (const std::exception&) {
            throw ConfigError("bad lag value '" + part + "' in '" + text + "'");
        }
    };

    std::vector<int> lags;
    const auto range_sep = text.find("..");
    if (range_sep != std::string::npos) {
        const int first = parse_one(text.substr(0, range_sep));
        const int last = parse_one(text.substr(range_sep + 2));
        if (last < first) {
            throw ConfigError("empty lag range '" + text + "'");
        }
        for (int lag = first; lag <= last; ++lag) lags.push_back(lag);
    } else {
        std::size_t begin = 0;
        while (begin <= text.size()) {
            const auto comma = text.find(',', begin);
            const auto end = comma == std::string::npos ? text.size() : comma;
            lags.push_back(parse_one(text.substr(begin, end - begin)));
            if (comma == std::string::npos) break;
            begin = comma + 1;
        }
    }
    for (const int lag : lags) {
        if (lag < 1) throw ConfigError("lags must be >= 1, got " + std::to_string(lag));
    }
    return lags;
}

std::vector<alloc::PolicyKind> parse_policy_list(const std::string& text) {
    std::vector<alloc::PolicyKind> kinds;
    std::size_t begin = 0;
    while (begin <= text.size()) {
        const auto comma = text.find(',', begin);
        const auto end = comma == std::string::npos ? text.size() : comma;
        const std::string name = text.substr(begin, end - begin);
        const auto kind = alloc::parse_policy(name);
        if (!kind) {
            throw ConfigError("unknown policy '" + name + "'");
        }
        if (std::find(kinds.begin(), kinds.end(), *kind) != kinds.end()) {
            throw ConfigError("duplicate policy '" + name + "'");
        }
        kinds.push_back(*kind);
        if (comma == std::string::npos) break;
        begin = comma + 1;
    }
    return kinds;
}

Format parse_format(const std::string& text) {
    if (text == "csv") return Format::Csv;
    if (text == "json") return Format::Json;
    throw ConfigError("unknown format '" + text + "' (expected csv or json)");
}

RunConfig load_config(const std::string& path) {
    if (!fs::exists(path)) {
        throw IoError("no config file at " + path);
    }
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError("malformed config file " + path + ": " + e.what());
    }
    static const std::set<std::string> kKnown = {
        "birth_rates", "schools",       "budget",   "lags",   "arx_configs", "effect_config",
        "prediction_lag", "policies",   "out",      "format", "plots",       "window"};
    RunConfig config;
    try {
        for (const auto& [key, value] : doc.items()) {
            if (!kKnown.count(key)) {
                throw ConfigError("unknown config key '" + key + "' in " + path);
            }
        }
        if (doc.contains("birth_rates")) {
            config.birth_rates_paths = doc.at("birth_rates").get<std::vector<std::string>>();
        }
        if (doc.contains("schools")) {
            config.schools_path = doc.at("schools").get<std::string>();
        }
        if (doc.contains("budget")) {
            config.annual_budget = doc.at("budget").get<double>();
            require_positive_budget(config.annual_budget);
        }
        if (doc.contains("lags")) {
            config.lag_set = doc.at("lags").get<std::vector<int>>();
            if (config.lag_set.empty()) throw ConfigError("lags must not be empty in " + path);
            for (const int lag : config.lag_set) {
                if (lag < 1) throw ConfigError("lags must be >= 1 in " + path);
            }
        }
        if (doc.contains("arx_configs")) {
            config.arx_configs.clear();
            for (const auto& item : doc.at("arx_configs")) {
                config.arx_configs.push_back(arx_config_from_json(item));
            }
            if (config.arx_configs.empty()) {
                throw ConfigError("arx_configs must not be empty in " + path);
            }
        }
        if (doc.contains("effect_config")) {
            config.effect_config = arx_config_from_json(doc.at("effect_config"));
        }
        if (doc.contains("prediction_lag")) {
            config.prediction_lag = doc.at("prediction_lag").get<int>();
            if (config.prediction_lag < 1) {
                throw ConfigError("prediction_lag must be >= 1 in " + path);
            }
        }
        if (doc.contains("policies")) {
            config.policies.clear();
            for (const auto& name : doc.at("policies")) {
                const auto kind = alloc::parse_policy(name.get<std::string>());
                if (!kind) {
                    throw ConfigError("unknown policy '" + name.get<std::string>() + "' in " +
                                      path);
                }
                if (std::find(config.policies.begin(), config.policies.end(), *kind) !=
                    config.policies.end()) {
                    throw ConfigError("duplicate policy '" + name.get<std::string>() + "' in " +
                                      path);
                }
                config.policies.push_back(*kind);
            }
        }
        if (doc.contains("out")) {
            config.out_dir = doc.at("out").get<std::string>();
        }
        if (doc.contains("format")) {
            config.format = parse_format(doc.at("format").get<std::string>());
        }
        if (doc.contains("plots")) {
            config.plots = doc.at("plots").get<bool>();
        }
        if (doc.contains("window")) {
            const std::string mode = doc.at("window").get<std::string>();
            if (mode == "max_data") {
                config.window = analysis::WindowMode::MaxData;
            } else if (mode == "aligned") {
                config.window = analysis::WindowMode::Aligned;
            } else {
                throw ConfigError("unknown window mode '" + mode + "' in " + path);
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError("bad config " + path + ": " + e.what());
    }
    return config;
}

std::string dataset_path(const RunConfig& config) {
    return join_path(config.out_dir, "dataset.json");
}

std::string models_path(const RunConfig& config) {
    return join_path(config.out_dir, "models.json");
}

void cmd_ingest(const RunConfig& config, std::ostream& log) {
    if (config.birth_rates_paths.empty()) {
        throw ConfigError("no birth-rate input files configured");
    }
    if (config.schools_path.empty()) {
        throw ConfigError("no schools input file configured");
    }
    for (const auto& path : config.birth_rates_paths) {
        if (!fs::exists(path)) throw IoError("input file not found: " + path);
    }
    if (!fs::exists(config.schools_path)) {
        throw IoError("input file not found: " + config.schools_path);
    }
    require_positive_budget(config.annual_budget);

    std::vector<ingest::BirthRateRecord> records;
    for (const auto& path : config.birth_rates_paths) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open " + path);
        try {
            records = ingest::merge_birth_records(records, ingest::parse_birth_rates(in));
        } catch (const InputError& e) {
            throw InputError(path + ": " + e.what());
        }
    }

    std::vector<ingest::SchoolRecord> schools;
    {
        std::ifstream in(config.schools_path, std::ios::binary);
        if (!in) throw IoError("cannot open " + config.schools_path);
        try {
            schools = ingest::parse_schools(in);
        } catch (const InputError& e) {
            throw InputError(config.schools_path + ": " + e.what());
        }
    }

    const auto rate_result = ingest::build_rate_series(records);

    std::map<int, Series> grants;
    if (!schools.empty()) {
        int first_year = 0, last_year = 0;
        bool seen = false;
        for (const auto& s : schools) {
            for (const auto& [year, enrolled] : s.enrollment_by_year) {
                if (!seen) {
                    first_year = last_year = year;
                    seen = true;
                } else {
                    first_year = std::min(first_year, year);
                    last_year = std::max(last_year, year);
                }
            }
        }
        std::vector<int> years;
        for (int year = first_year; year <= last_year; ++year) years.push_back(year);
        std::set<int> rate_areas;
        for (const auto& [code, series] : rate_result.by_area) rate_areas.insert(code);
        grants = ingest::build_grant_series(schools, config.annual_budget, years, rate_areas);
    }

    json areas = json::array();
    for (const auto& [code, series] : rate_result.by_area) {
        json area{{"code", code},
                  {"name", area_name(rate_result.area_names, code)},
                  {"rates", series_to_json(series)}};
        const auto grant_it = grants.find(code);
        if (grant_it != grants.end()) {
            area["grants"] = series_to_json(grant_it->second);
        }
        areas.push_back(std::move(area));
    }

    json notes = json::array();
    std::size_t excluded = 0, interpolated = 0;
    for (const auto& note : rate_result.notes) {
        json entry{{"area", note.area_code},
                   {"kind", note.kind},
                   {"detail", note.detail},
                   {"name", area_name(rate_result.area_names, note.area_code)}};
        entry["year"] = note.year ? json(*note.year) : json(nullptr);
        notes.push_back(std::move(entry));
        if (note.kind == "excluded") ++excluded;
        if (note.kind == "interpolated") ++interpolated;
    }

    json school_list = json::array();
    for (const auto& s : schools) {
        json enrollment = json::object();
        for (const auto& [year, enrolled] : s.enrollment_by_year) {
            enrollment[std::to_string(year)] = enrolled;
        }
        school_list.push_back(json{{"id", s.school_id},
                                   {"name", s.name},
                                   {"area", s.area_code},
                                   {"enrollment", std::move(enrollment)}});
    }

    const json bundle{{"budget", config.annual_budget},
                      {"areas", std::move(areas)},
                      {"notes", std::move(notes)},
                      {"schools", std::move(school_list)}};

    ensure_out_dir(config);
    write_file(dataset_path(config), bundle.dump(2) + "\n");

    log << "areas with usable series: " << rate_result.by_area.size() << "\n";
    log << "areas excluded: " << excluded << "\n";
    log << "interpolated points: " << interpolated << "\n";
    log << "schools: " << schools.size() << "\n";
    log << "wrote " << dataset_path(config) << "\n";
}

void cmd_analyze(const RunConfig& config, std::ostream& log) {
    const Dataset data = load_dataset(config);
    if (data.rates.empty()) {
        throw EmptyDataset("dataset bundle contains no usable areas");
    }

    const auto ar = analysis::run_ar_sweep(data.rates, config.lag_set, config.window);
    const auto arx = analysis::run_arx_sweep(data.rates, data.grants, config.arx_configs,
                                             config.window);

    ensure_out_dir(config);
    std::vector<std::string> written;

    if (config.format == Format::Csv) {
        std::ostringstream table;
        csv::write_row(table, {"lag", "overall_r2", "n_areas", "n_samples"});
        for (const auto& [lag, entry] : ar) {
            csv::write_row(table, {std::to_string(lag), r2_field(entry.overall_r2),
                                   std::to_string(entry.n_areas),
                                   std::to_string(entry.n_samples)});
        }
        written.push_back(join_path(config.out_dir, "r2_by_lag.csv"));
        write_file(written.back(), table.str());

        std::ostringstream top;
        csv::write_row(top, {"rank", "lag", "area_code", "area_name", "r2"});
        for (const auto& [lag, entry] : ar) {
            const auto ranked = analysis::rank_by_r2(entry, 10);
            for (std::size_t i = 0; i < ranked.size(); ++i) {
                csv::write_row(top, {std::to_string(i + 1), std::to_string(lag),
                                     std::to_string(ranked[i].area_code),
                                     area_name(data.names, ranked[i].area_code),
                                     csv::format_double(ranked[i].r2)});
            }
        }
        written.push_back(join_path(config.out_dir, "top10_ar.csv"));
        write_file(written.back(), top.str());

        std::ostringstream effect;
        csv::write_row(effect, {"rank", "l", "v", "area_code", "area_name",
                                "coeff_per_thousand"});
        for (const auto& [cfg, entry] : arx) {
            const auto ranked = analysis::rank_effectiveness(entry, cfg, 10);
            for (std::size_t i = 0; i < ranked.size(); ++i) {
                csv::write_row(effect,
                               {std::to_string(i + 1), std::to_string(cfg.endo_lags),
                                std::to_string(cfg.exo_lags),
                                std::to_string(ranked[i].area_code),
                                area_name(data.names, ranked[i].area_code),
                                csv::format_double(ranked[i].coefficient)});
            }
        }
        written.push_back(join_path(config.out_dir, "top10_effectiveness.csv"));
        write_file(written.back(), effect.str());

        std::ostringstream stable;
        csv::write_row(stable, {"area_code", "area_name"});
        for (const int code : analysis::stable_areas(arx, 10)) {
            csv::write_row(stable, {std::to_string(code), area_name(data.names, code)});
        }
        written.push_back(join_path(config.out_dir, "stable_areas.csv"));
        write_file(written.back(), stable.str());
    } else {
        json by_lag = json::array();
        for (const auto& [lag, entry] : ar) {
            by_lag.push_back(json{{"lag", lag},
                                  {"overall_r2", r2_json(entry.overall_r2)},
                                  {"n_areas", entry.n_areas},
                                  {"n_samples", entry.n_samples}});
        }
        written.push_back(join_path(config.out_dir, "r2_by_lag.json"));
        write_file(written.back(), by_lag.dump(2) + "\n");

        json top = json::array();
        for (const auto& [lag, entry] : ar) {
            json entries = json::array();
            const auto ranked = analysis::rank_by_r2(entry, 10);
            for (std::size_t i = 0; i < ranked.size(); ++i) {
                entries.push_back(json{{"rank", i + 1},
                                       {"area_code", ranked[i].area_code},
                                       {"area_name", area_name(data.names, ranked[i].area_code)},
                                       {"r2", ranked[i].r2}});
            }
            top.push_back(json{{"lag", lag}, {"entries", std::move(entries)}});
        }
        written.push_back(join_path(config.out_dir, "top10_ar.json"));
        write_file(written.back(), top.dump(2) + "\n");

        json effect = json::array();
        for (const auto& [cfg, entry] : arx) {
            json entries = json::array();
            const auto ranked = analysis::rank_effectiveness(entry, cfg, 10);
            for (std::size_t i = 0; i < ranked.size(); ++i) {
                entries.push_back(json{{"rank", i + 1},
                                       {"area_code", ranked[i].area_code},
                                       {"area_name", area_name(data.names, ranked[i].area_code)},
                                       {"coeff_per_thousand", ranked[i].coefficient}});
            }
            effect.push_back(json{{"config", arx_config_to_json(cfg)},
                                  {"overall_r2", r2_json(entry.overall_r2)},
                                  {"entries", std::move(entries)}});
        }
        written.push_back(join_path(config.out_dir, "top10_effectiveness.json"));
        write_file(written.back(), effect.dump(2) + "\n");

        json stable = json::array();
        for (const int code : analysis::stable_areas(arx, 10)) {
            stable.push_back(json{{"area_code", code}, {"area_name", area_name(data.names, code)}});
        }
        written.push_back(join_path(config.out_dir, "stable_areas.json"));
        write_file(written.back(), stable.dump(2) + "\n");
    }

    // Fitted models the allocation step consumes, independent of the report
    // format. Prediction models may fail per area on short series; those
    // areas simply carry no prediction.
    json predictions = json::array();
    for (const auto& [code, series] : data.rates) {
        try {
            const auto fit = regress::fit_ar(series, {config.prediction_lag});
            const double rate = regress::predict_next(fit, series, {config.prediction_lag});
            predictions.push_back(json{{"area", code}, {"rate", rate}});
        } catch (const SeriesTooShort&) {
            continue;
        }
    }
    json grant_models = json::array();
    for (const auto& [code, series] : data.rates) {
        const auto grant_it = data.grants.find(code);
        if (grant_it == data.grants.end()) continue;
        try {
            const auto fit = regress::fit_arx(series, grant_it->second, config.effect_config);
            grant_models.push_back(json{{"area", code},
                                        {"endo_coeffs", to_vector(fit.endo_coeffs)},
                                        {"exo_coeffs", to_vector(fit.exo_coeffs)}});
        } catch (const AnalysisError&) {
            continue;
        }
    }
    const json models{{"prediction_lag", config.prediction_lag},
                      {"effect_config", arx_config_to_json(config.effect_config)},
                      {"predictions", std::move(predictions)},
                      {"grant_models", std::move(grant_models)}};
    written.push_back(models_path(config));
    write_file(written.back(), models.dump(2) + "\n");

    if (config.plots) {
        written.push_back(join_path(config.out_dir, "r2_curves.svg"));
        write_file(written.back(), render_r2_svg(ar, arx));
    }

    for (const auto& [lag, entry] : ar) {
        log << "lag " << lag << ": overall R2 "
            << (entry.overall_r2.defined() ? csv::format_double(entry.overall_r2.value())
                                           : "undefined")
            << " over " << entry.n_areas << " areas, " << entry.n_samples << " samples\n";
    }
    for (const auto& [cfg, entry] : arx) {
        log << "grant model " << config_label(cfg) << ": overall R2 "
            << (entry.overall_r2.defined() ? csv::format_double(entry.overall_r2.value())
                                           : "undefined")
            << "\n";
    }
    for (const auto& path : written) log << "wrote " << path << "\n";
}

void cmd_allocate(const RunConfig& config, std::ostream& log) {
    const Dataset data = load_dataset(config);

    const std::string models_file = models_path(config);
    if (!fs::exists(models_file)) {
        throw MissingModel("no fitted models at " + models_file + " (run analyze first)");
    }
    const json models_doc = parse_json_file(models_file, "models file");

    alloc::AnalysisInputs inputs;
    std::map<int, alloc::AreaModel> models;
    regress::ArxConfig effect_config;
    try {
        effect_config = arx_config_from_json(models_doc.at("effect_config"));
        for (const auto& p : models_doc.at("predictions")) {
            inputs.predicted_rates[p.at("area").get<int>()] = p.at("rate").get<double>();
        }
        for (const auto& m : models_doc.at("grant_models")) {
            const auto endo = m.at("endo_coeffs").get<std::vector<double>>();
            const auto exo = m.at("exo_coeffs").get<std::vector<double>>();
            alloc::AreaModel model;
            model.config = effect_config;
            model.fit.endo_coeffs = Eigen::Map<const Eigen::VectorXd>(
                endo.data(), static_cast<Eigen::Index>(endo.size()));
            model.fit.exo_coeffs = Eigen::Map<const Eigen::VectorXd>(
                exo.data(), static_cast<Eigen::Index>(exo.size()));
            model.fit.n_params = static_cast<int>(endo.size() + exo.size());
            const int code = m.at("area").get<int>();
            if (!exo.empty()) {
                inputs.effectiveness[code] = exo.front();
            }
            models.emplace(code, std::move(model));
        }
    } catch (const json::exception& e) {
        throw IoError("malformed models file " + models_file + ": " + e.what());
    }

    if (config.policies.empty()) {
        throw ConfigError("no policies configured");
    }
    require_positive_budget(config.annual_budget);

    ensure_out_dir(config);
    std::vector<std::string> written;

    std::vector<alloc::AllocationPlan> plans;
    for (const auto kind : config.policies) {
        plans.push_back(alloc::allocate({kind, config.annual_budget}, data.schools, inputs));
    }

    std::map<std::string, const ingest::SchoolRecord*> school_by_id;
    for (const auto& s : data.schools) school_by_id.emplace(s.school_id, &s);

    for (const auto& plan : plans) {
        const std::string name = alloc::to_string(plan.policy.kind);
        if (config.format == Format::Csv) {
            std::ostringstream table;
            csv::write_row(table, {"school_id", "school_name", "area_code", "amount"});
            for (const auto& [id, amount] : plan.school_amounts) {
                const auto* school = school_by_id.at(id);
                csv::write_row(table, {id, school->name, std::to_string(school->area_code),
                                       csv::format_fixed(amount, 2)});
            }
            written.push_back(join_path(config.out_dir, "plan_" + name + ".csv"));
            write_file(written.back(), table.str());
        } else {
            json schools_json = json::array();
            for (const auto& [id, amount] : plan.school_amounts) {
                const auto* school = school_by_id.at(id);
                schools_json.push_back(json{{"id", id},
                                            {"name", school->name},
                                            {"area", school->area_code},
                                            {"amount", amount}});
            }
            json areas_json = json::array();
            for (const auto& [code, amount] : plan.area_amounts) {
                areas_json.push_back(json{{"area", code}, {"amount", amount}});
            }
            const json doc{{"policy", name},
                           {"budget", plan.policy.budget},
                           {"year", plan.year},
                           {"used_fallback", plan.used_fallback},
                           {"schools", std::move(schools_json)},
                           {"areas", std::move(areas_json)}};
            written.push_back(join_path(config.out_dir, "plan_" + name + ".json"));
            write_file(written.back(), doc.dump(2) + "\n");
        }
        if (plan.used_fallback) {
            log << "note: " << name << " found no effective areas, fell back to "
                << alloc::to_string(alloc::PolicyKind::EqualPerStudent) << "\n";
        }
    }

    const auto enrollment = alloc::latest_area_enrollment(data.schools);
    const auto scenario = alloc::simulate(plans, models, data.rates, data.grants, enrollment);

    if (config.format == Format::Csv) {
        std::ostringstream table;
        std::vector<std::string> header = {"area_code", "area_name", "baseline_rate"};
        for (const auto& name : scenario.plan_names) header.push_back(name + "_rate");
        for (const auto& name : scenario.plan_names) header.push_back(name + "_delta");
        csv::write_row(table, header);
        for (const auto& area : scenario.areas) {
            std::vector<std::string> row = {std::to_string(area.area_code),
                                            area_name(data.names, area.area_code),
                                            csv::format_double(area.baseline)};
            for (const double rate : area.rates) row.push_back(csv::format_double(rate));
            for (const double rate : area.rates) {
                row.push_back(csv::format_double(rate - area.baseline));
            }
            csv::write_row(table, row);
        }
        written.push_back(join_path(config.out_dir, "scenario_report.csv"));
        write_file(written.back(), table.str());
    } else {
        json areas_json = json::array();
        for (const auto& area : scenario.areas) {
            json rates_json = json::object();
            json floored_json = json::object();
            for (std::size_t p = 0; p < scenario.plan_names.size(); ++p) {
                rates_json[scenario.plan_names[p]] = area.rates[p];
                floored_json[scenario.plan_names[p]] = static_cast<bool>(area.floored[p]);
            }
            areas_json.push_back(json{{"area_code", area.area_code},
                                      {"area_name", area_name(data.names, area.area_code)},
                                      {"baseline_rate", area.baseline},
                                      {"baseline_floored", area.baseline_floored},
                                      {"rates", std::move(rates_json)},
                                      {"floored", std::move(floored_json)}});
        }
        json means = json::object();
        for (std::size_t p = 0; p < scenario.plan_names.size(); ++p) {
            means[scenario.plan_names[p]] = scenario.citywide_means[p];
        }
        const json doc{{"citywide_baseline", scenario.citywide_baseline},
                       {"citywide_means", std::move(means)},
                       {"areas", std::move(areas_json)}};
        written.push_back(join_path(config.out_dir, "scenario_report.json"));
        write_file(written.back(), doc.dump(2) + "\n");
    }

    std::vector<alloc::PolicyOutcome> ranking;
    if (plans.size() >= 2) {
        ranking = alloc::compare(scenario);
    } else {
        ranking.push_back({scenario.plan_names[0], scenario.citywide_means[0],
                           static_cast<int>(scenario.areas.size())});
    }
    if (config.format == Format::Csv) {
        std::ostringstream table;
        csv::write_row(table, {"rank", "policy", "citywide_mean_rate", "areas_led"});
        for (std::size_t i = 0; i < ranking.size(); ++i) {
            csv::write_row(table, {std::to_string(i + 1), ranking[i].plan_name,
                                   csv::format_double(ranking[i].citywide_mean),
                                   std::to_string(ranking[i].areas_led)});
        }
        written.push_back(join_path(config.out_dir, "scenario_summary.csv"));
        write_file(written.back(), table.str());
    } else {
        json rows = json::array();
        for (std::size_t i = 0; i < ranking.size(); ++i) {
            rows.push_back(json{{"rank", i + 1},
                                {"policy", ranking[i].plan_name},
                                {"citywide_mean_rate", ranking[i].citywide_mean},
                                {"areas_led", ranking[i].areas_led}});
        }
        written.push_back(join_path(config.out_dir, "scenario_summary.json"));
        write_file(written.back(), rows.dump(2) + "\n");
    }

    log << "citywide baseline rate: " << csv::format_double(scenario.citywide_baseline) << "\n";
    for (const auto& outcome : ranking) {
        log << outcome.plan_name << ": citywide mean "
            << csv::format_double(outcome.citywide_mean) << ", leads " << outcome.areas_led
            << " areas\n";
    }
    for (const auto& path : written) log << "wrote " << path << "\n";
}

}  // namespace tppi::report
