#include "nsplan/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace nsplan {

std::string format_number(double value) {
    if (std::isnan(value)) return "";
    char buf[64];
    // shortest representation that round-trips exactly
    for (int precision = 1; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof(buf), "%.*g", precision, value);
        if (std::strtod(buf, nullptr) == value) return buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::string render_raw_csv(const std::vector<ScenarioResult>& results) {
    std::ostringstream out;
    out << "cell,env,p_old,p_new,planner,model_access,episode,episode_seed,steps,"
           "discounted_return,regular_fraction\n";
    for (const ScenarioResult& result : results) {
        const ScenarioConfig& cfg = result.config;
        for (const EpisodeResult& ep : result.episodes) {
            out << cfg.cell_id() << "," << cfg.env_name << "," << format_number(cfg.p_old) << ","
                << format_number(cfg.p_new) << "," << planner_name(cfg.planner) << ","
                << access_name(cfg.model_access) << "," << ep.episode << "," << ep.seed << ","
                << ep.steps << "," << format_number(ep.discounted_return) << ","
                << format_number(ep.regular_fraction) << "\n";
        }
    }
    return out.str();
}

std::string render_summary_csv(const std::vector<ScenarioResult>& results) {
    std::ostringstream out;
    out << "cell,env,p_old,p_new,planner,model_access,episodes,mean_return,stderr,"
           "mean_decision_seconds,mean_regular_fraction,error\n";
    for (const ScenarioResult& result : results) {
        const ScenarioConfig& cfg = result.config;
        out << cfg.cell_id() << "," << cfg.env_name << "," << format_number(cfg.p_old) << ","
            << format_number(cfg.p_new) << "," << planner_name(cfg.planner) << ","
            << access_name(cfg.model_access) << "," << result.episodes.size() << ","
            << format_number(result.mean_return) << "," << format_number(result.stderr_return)
            << "," << format_number(result.mean_decision_seconds) << ","
            << format_number(result.mean_regular_fraction) << "," << result.error << "\n";
    }
    return out.str();
}

std::string render_summary_json(const std::vector<ScenarioResult>& results) {
    nlohmann::json cells = nlohmann::json::array();
    for (const ScenarioResult& result : results) {
        const ScenarioConfig& cfg = result.config;
        nlohmann::json cell;
        cell["cell"] = cfg.cell_id();
        cell["env"] = cfg.env_name;
        cell["p_old"] = cfg.p_old;
        cell["p_new"] = cfg.p_new;
        cell["planner"] = planner_name(cfg.planner);
        cell["model_access"] = access_name(cfg.model_access);
        cell["episodes"] = result.episodes.size();
        cell["mean_return"] = result.mean_return;
        if (std::isnan(result.stderr_return))
            cell["stderr"] = nullptr;
        else
            cell["stderr"] = result.stderr_return;
        cell["mean_decision_seconds"] = result.mean_decision_seconds;
        cell["mean_regular_fraction"] = result.mean_regular_fraction;
        if (!result.error.empty()) cell["error"] = result.error;
        cell["mode_trace"] = result.mode_trace();
        cells.push_back(cell);
    }
    nlohmann::json doc;
    doc["cells"] = cells;
    return doc.dump(2) + "\n";
}

std::string render_summary_table(const std::vector<ScenarioResult>& results) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-16s %6s %-9s %-22s %10s %8s %10s\n", "env", "p_new",
                  "planner", "model_access", "mean", "stderr", "sec/dec");
    out << line;
    for (const ScenarioResult& result : results) {
        const ScenarioConfig& cfg = result.config;
        if (!result.error.empty()) {
            std::snprintf(line, sizeof(line), "%-16s %6.2f %-9s %-22s  error: %s\n",
                          cfg.env_name.c_str(), cfg.p_new, planner_name(cfg.planner).c_str(),
                          access_name(cfg.model_access).c_str(), result.error.c_str());
            out << line;
            continue;
        }
        std::snprintf(line, sizeof(line), "%-16s %6.2f %-9s %-22s %10.3f %8.3f %10.4f\n",
                      cfg.env_name.c_str(), cfg.p_new, planner_name(cfg.planner).c_str(),
                      access_name(cfg.model_access).c_str(), result.mean_return,
                      result.stderr_return, result.mean_decision_seconds);
        out << line;
    }
    return out.str();
}

std::string render_timing_csv(const std::vector<TimingRow>& rows) {
    std::ostringstream out;
    out << "env,decisions,ada_mean_seconds,ada_sd_seconds,rats_mean_seconds,rats_sd_seconds,"
           "speedup\n";
    for (const TimingRow& row : rows) {
        out << row.env << "," << row.decisions << "," << format_number(row.ada_mean_seconds) << ","
            << format_number(row.ada_sd_seconds) << "," << format_number(row.rats_mean_seconds)
            << "," << format_number(row.rats_sd_seconds) << "," << format_number(row.speedup)
            << "\n";
    }
    return out.str();
}

std::string render_timing_table(const std::vector<TimingRow>& rows) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-16s %10s %12s %12s %9s\n", "env", "decisions",
                  "ada sec/dec", "rats sec/dec", "speedup");
    out << line;
    for (const TimingRow& row : rows) {
        std::snprintf(line, sizeof(line), "%-16s %10d %12.4f %12.4f %8.1f%%\n", row.env.c_str(),
                      row.decisions, row.ada_mean_seconds, row.rats_mean_seconds,
                      100.0 * row.speedup);
        out << line;
    }
    return out.str();
}

std::string render_return_vs_p_svg(const std::vector<ScenarioResult>& results,
                                   const std::string& env_name) {
    // collect (p -> mean) per planner column for one environment
    std::map<std::string, std::map<double, double>> series;
    double lo = 0.0, hi = 1.0;
    bool any = false;
    for (const ScenarioResult& result : results) {
        if (result.config.env_name != env_name || !result.error.empty()) continue;
        const std::string label =
            planner_name(result.config.planner) + "-" + access_name(result.config.model_access);
        series[label][result.config.p_new] = result.mean_return;
        lo = any ? std::min(lo, result.mean_return) : result.mean_return;
        hi = any ? std::max(hi, result.mean_return) : result.mean_return;
        any = true;
    }
    if (!any) return "";
    if (hi - lo < 1e-9) hi = lo + 1.0;
    const int width = 640, height = 420, margin = 50;
    const auto x_of = [&](double p) {
        return margin + (p - 0.3) / (1.05 - 0.3) * (width - 2 * margin);
    };
    const auto y_of = [&](double v) {
        return height - margin - (v - lo) / (hi - lo) * (height - 2 * margin);
    };
    static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                   "#9467bd", "#8c564b", "#e377c2"};
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
        << env_name << ": mean discounted return vs p</text>\n";
    // axes
    out << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
        << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
        << height - margin << "\" stroke=\"black\"/>\n";
    for (double v : {lo, (lo + hi) / 2.0, hi}) {
        out << "<text x=\"" << margin - 6 << "\" y=\"" << y_of(v) + 4
            << "\" text-anchor=\"end\" font-size=\"10\">" << format_number(std::round(v * 100) / 100)
            << "</text>\n";
    }
    int color_index = 0;
    int legend_y = margin;
    for (const auto& [label, points] : series) {
        const char* color = colors[color_index % 7];
        std::ostringstream path;
        bool first = true;
        for (const auto& [p, v] : points) {
            path << (first ? "M" : "L") << x_of(p) << " " << y_of(v) << " ";
            first = false;
            out << "<circle cx=\"" << x_of(p) << "\" cy=\"" << y_of(v) << "\" r=\"3\" fill=\""
                << color << "\"/>\n";
            out << "<text x=\"" << x_of(p) << "\" y=\"" << height - margin + 14
                << "\" text-anchor=\"middle\" font-size=\"10\">" << format_number(p) << "</text>\n";
        }
        out << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.5\"/>\n";
        out << "<text x=\"" << width - margin + 4 << "\" y=\"" << legend_y
            << "\" font-size=\"10\" fill=\"" << color << "\">" << label << "</text>\n";
        legend_y += 14;
        ++color_index;
    }
    out << "</svg>\n";
    return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

void write_results(const std::vector<ScenarioResult>& results, const std::string& directory,
                   bool plots) {
    std::filesystem::create_directories(directory);
    write_text_file(directory + "/raw.csv", render_raw_csv(results));
    write_text_file(directory + "/summary.csv", render_summary_csv(results));
    write_text_file(directory + "/summary.json", render_summary_json(results));
    if (plots) {
        std::filesystem::create_directories(directory + "/plots");
        std::set<std::string> envs;
        for (const ScenarioResult& r : results) envs.insert(r.config.env_name);
        for (const std::string& env : envs) {
            const std::string svg = render_return_vs_p_svg(results, env);
            if (!svg.empty()) write_text_file(directory + "/plots/" + env + ".svg", svg);
        }
    }
}

}  // namespace nsplan
