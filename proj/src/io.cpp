#include "tomocal/io.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <ctime>
#include <fmt/format.h>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string_view>
#include <tuple>

#include "tomocal/errors.hpp"

namespace tomocal::io {

namespace {

[[noreturn]] void io_fail(const std::filesystem::path& path, const std::string& what) {
    throw CalibError(ErrorCode::IoError, fmt::format("{}: {}", path.string(), what));
}

double require_number(const json& value, const std::string& key) {
    if (!value.contains(key) || !value[key].is_number()) {
        throw CalibError(ErrorCode::InvalidArgument,
                         fmt::format("missing or non-numeric field \"{}\"", key));
    }
    return value[key].get<double>();
}

Point2 point_from_json(const json& value, const std::string& context) {
    if (!value.is_array() || value.size() != 2 || !value[0].is_number() ||
        !value[1].is_number()) {
        throw CalibError(ErrorCode::InvalidArgument,
                         fmt::format("{}: markers must be [x, y] pairs", context));
    }
    return {value[0].get<double>(), value[1].get<double>()};
}

std::vector<Point2> points_from_json(const json& value, const std::string& key) {
    if (!value.contains(key) || !value[key].is_array()) {
        throw CalibError(ErrorCode::InvalidArgument,
                         fmt::format("missing marker array \"{}\"", key));
    }
    std::vector<Point2> points;
    for (const auto& item : value[key]) points.push_back(point_from_json(item, key));
    return points;
}

json points_to_json(std::span<const Point2> points) {
    json list = json::array();
    for (Point2 p : points) list.push_back(json::array({p.x, p.y}));
    return list;
}

Geometry geometry_from_string(const std::string& name) {
    if (name == "parallel") return Geometry::Parallel;
    if (name == "fanbeam") return Geometry::FanBeam;
    throw CalibError(ErrorCode::InvalidArgument,
                     fmt::format("unknown geometry \"{}\" (expected \"parallel\" or "
                                 "\"fanbeam\")",
                                 name));
}

// One parsed CSV row; `weight` is NaN when the column is absent.
struct CsvRow {
    int view = 0;
    std::string group;
    int marker = 0;
    double position = 0.0;
    double weight = std::numeric_limits<double>::quiet_NaN();
};

int parse_int(std::string_view field, const std::filesystem::path& path, std::size_t line) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        io_fail(path, fmt::format("line {}: expected an integer, got \"{}\"", line, field));
    }
    return value;
}

double parse_double(std::string_view field, const std::filesystem::path& path,
                    std::size_t line) {
    std::string buffer(field);
    char* end = nullptr;
    errno = 0;
    const double value = std::strtod(buffer.c_str(), &end);
    if (errno != 0 || end != buffer.c_str() + buffer.size() || buffer.empty()) {
        io_fail(path, fmt::format("line {}: expected a number, got \"{}\"", line, field));
    }
    return value;
}

std::vector<std::string_view> split_fields(std::string_view text) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = text.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(text.substr(start));
            return fields;
        }
        fields.push_back(text.substr(start, comma - start));
        start = comma + 1;
    }
}

std::vector<CsvRow> load_csv_rows(const std::filesystem::path& path, bool* has_weights) {
    const std::string text = read_text_file(path);
    std::vector<std::string_view> lines;
    {
        std::string_view rest = text;
        while (!rest.empty()) {
            std::size_t eol = rest.find('\n');
            std::string_view line = rest.substr(0, eol);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            if (!line.empty()) lines.push_back(line);
            if (eol == std::string_view::npos) break;
            rest.remove_prefix(eol + 1);
        }
    }
    if (lines.empty()) io_fail(path, "empty projection file");

    const std::string_view header = lines.front();
    bool weights = false;
    if (header == "view_index,group,marker_index,position,weight") {
        weights = true;
    } else if (header != "view_index,group,marker_index,position") {
        io_fail(path, fmt::format("unexpected header \"{}\"", header));
    }
    if (has_weights) *has_weights = weights;

    std::vector<CsvRow> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = split_fields(lines[i]);
        if (fields.size() != (weights ? 5u : 4u)) {
            io_fail(path, fmt::format("line {}: expected {} fields, got {}", i + 1,
                                      weights ? 5 : 4, fields.size()));
        }
        CsvRow row;
        row.view = parse_int(fields[0], path, i + 1);
        row.group = std::string(fields[1]);
        row.marker = parse_int(fields[2], path, i + 1);
        row.position = parse_double(fields[3], path, i + 1);
        if (weights) row.weight = parse_double(fields[4], path, i + 1);
        if (row.view < 0 || row.marker < 0) {
            io_fail(path, fmt::format("line {}: negative index", i + 1));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) io_fail(path, "no data rows");
    return rows;
}

// Groups rows into per-view projections. `groups` maps the CSV group
// letter to the slot (0 or 1) in the output pair.
template <typename Detections>
std::vector<Detections> group_rows(std::vector<CsvRow> rows, const std::filesystem::path& path,
                                   const std::map<std::string, int>& groups, bool keep_weights,
                                   DiracProjection Detections::*first,
                                   DiracProjection Detections::*second,
                                   MarkerGroup first_group, MarkerGroup second_group) {
    std::stable_sort(rows.begin(), rows.end(), [](const CsvRow& x, const CsvRow& y) {
        return std::tie(x.view, x.group, x.marker) < std::tie(y.view, y.group, y.marker);
    });

    int max_view = 0;
    for (const CsvRow& row : rows) {
        if (!groups.contains(row.group)) {
            io_fail(path, fmt::format("unknown group \"{}\" for this geometry", row.group));
        }
        max_view = std::max(max_view, row.view);
    }

    std::vector<Detections> views(static_cast<std::size_t>(max_view) + 1);
    for (std::size_t i = 0; i < views.size(); ++i) {
        (views[i].*first).view_index = static_cast<int>(i);
        (views[i].*first).group = first_group;
        (views[i].*second).view_index = static_cast<int>(i);
        (views[i].*second).group = second_group;
    }
    for (const CsvRow& row : rows) {
        Detections& view = views[static_cast<std::size_t>(row.view)];
        DiracProjection& proj = groups.at(row.group) == 0 ? view.*first : view.*second;
        proj.positions.push_back(row.position);
        if (keep_weights) proj.weights.push_back(row.weight);
    }
    return views;
}

void append_csv_rows(std::string& out, const DiracProjection& proj, bool with_weights) {
    for (std::size_t j = 0; j < proj.positions.size(); ++j) {
        if (with_weights) {
            out += fmt::format("{},{},{},{},{}\n", proj.view_index, to_string(proj.group), j,
                               format_double(proj.positions[j]), format_double(proj.weights[j]));
        } else {
            out += fmt::format("{},{},{},{}\n", proj.view_index, to_string(proj.group), j,
                               format_double(proj.positions[j]));
        }
    }
}

Interval interval_from_json(const json& value, const std::string& key) {
    if (!value.is_array() || value.size() != 2 || !value[0].is_number() ||
        !value[1].is_number()) {
        throw CalibError(ErrorCode::InvalidArgument,
                         fmt::format("\"{}\" must be a [lo, hi] pair", key));
    }
    return {value[0].get<double>(), value[1].get<double>()};
}

}  // namespace

json read_json_file(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) io_fail(path, "invalid JSON");
    return value;
}

void write_json_file(const std::filesystem::path& path, const json& value) {
    write_text_file(path, value.dump(2) + "\n");
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) io_fail(path, "cannot open for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (!in.good() && !in.eof()) io_fail(path, "read error");
    return std::move(buffer).str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) io_fail(path, "cannot open for writing");
    out << text;
    out.flush();
    if (!out.good()) io_fail(path, "write error");
}

RigFile rig_from_json(const json& value) {
    if (!value.is_object() || !value.contains("geometry") || !value["geometry"].is_string()) {
        throw CalibError(ErrorCode::InvalidArgument,
                         "rig: expected an object with a \"geometry\" string");
    }
    RigFile rig;
    rig.geometry = geometry_from_string(value["geometry"].get<std::string>());
    if (rig.geometry == Geometry::Parallel) {
        rig.parallel.h_markers = points_from_json(value, "h_markers");
        rig.parallel.v_markers = points_from_json(value, "v_markers");
    } else {
        rig.fanbeam.D = require_number(value, "D");
        rig.fanbeam.C_a = require_number(value, "C_a");
        rig.fanbeam.p_a = require_number(value, "p_a");
        rig.fanbeam.C_b = require_number(value, "C_b");
        rig.fanbeam.p_b = require_number(value, "p_b");
        rig.fanbeam.L = require_number(value, "L");
        rig.fanbeam.k1 = require_number(value, "k1");
        rig.fanbeam.k2 = require_number(value, "k2");
        rig.fanbeam.k3 = require_number(value, "k3");
    }
    return rig;
}

json rig_to_json(const RigFile& rig) {
    json value;
    value["geometry"] = to_string(rig.geometry);
    if (rig.geometry == Geometry::Parallel) {
        value["h_markers"] = points_to_json(rig.parallel.h_markers);
        value["v_markers"] = points_to_json(rig.parallel.v_markers);
    } else {
        value["D"] = rig.fanbeam.D;
        value["C_a"] = rig.fanbeam.C_a;
        value["p_a"] = rig.fanbeam.p_a;
        value["C_b"] = rig.fanbeam.C_b;
        value["p_b"] = rig.fanbeam.p_b;
        value["L"] = rig.fanbeam.L;
        value["k1"] = rig.fanbeam.k1;
        value["k2"] = rig.fanbeam.k2;
        value["k3"] = rig.fanbeam.k3;
    }
    return value;
}

RigFile load_rig(const std::filesystem::path& path) {
    return rig_from_json(read_json_file(path));
}

std::vector<ParallelView> parallel_views_from_json(const json& value) {
    if (!value.is_array()) {
        throw CalibError(ErrorCode::InvalidArgument, "views: expected an array");
    }
    std::vector<ParallelView> views;
    for (const auto& item : value) {
        views.push_back({require_number(item, "alpha"), require_number(item, "shift")});
    }
    return views;
}

std::vector<FanBeamView> fanbeam_views_from_json(const json& value) {
    if (!value.is_array()) {
        throw CalibError(ErrorCode::InvalidArgument, "views: expected an array");
    }
    std::vector<FanBeamView> views;
    for (const auto& item : value) {
        views.push_back({require_number(item, "lambda"), require_number(item, "jitter")});
    }
    return views;
}

json views_to_json(std::span<const ParallelView> views) {
    json list = json::array();
    for (const auto& v : views) list.push_back({{"alpha", v.alpha}, {"shift", v.shift}});
    return list;
}

json views_to_json(std::span<const FanBeamView> views) {
    json list = json::array();
    for (const auto& v : views) list.push_back({{"lambda", v.lambda}, {"jitter", v.jitter}});
    return list;
}

void save_parallel_projections(const std::filesystem::path& path,
                               std::span<const ParallelDetections> views) {
    std::string out = "view_index,group,marker_index,position\n";
    for (const auto& view : views) {
        append_csv_rows(out, view.h, false);
        append_csv_rows(out, view.v, false);
    }
    write_text_file(path, out);
}

std::vector<ParallelDetections> load_parallel_projections(const std::filesystem::path& path) {
    bool has_weights = false;
    std::vector<CsvRow> rows = load_csv_rows(path, &has_weights);
    if (has_weights) io_fail(path, "parallel projections must not carry a weight column");
    return group_rows<ParallelDetections>(std::move(rows), path, {{"h", 0}, {"v", 1}}, false,
                                          &ParallelDetections::h, &ParallelDetections::v,
                                          MarkerGroup::H, MarkerGroup::V);
}

void save_fanbeam_projections(const std::filesystem::path& path,
                              std::span<const FanBeamDetections> views) {
    std::string out = "view_index,group,marker_index,position,weight\n";
    for (const auto& view : views) {
        append_csv_rows(out, view.a, true);
        append_csv_rows(out, view.b, true);
    }
    write_text_file(path, out);
}

std::vector<FanBeamDetections> load_fanbeam_projections(const std::filesystem::path& path) {
    bool has_weights = false;
    std::vector<CsvRow> rows = load_csv_rows(path, &has_weights);
    return group_rows<FanBeamDetections>(std::move(rows), path, {{"a", 0}, {"b", 1}},
                                         has_weights, &FanBeamDetections::a,
                                         &FanBeamDetections::b, MarkerGroup::A, MarkerGroup::B);
}

ExperimentConfig experiment_config_from_json(const json& value) {
    if (!value.is_object()) {
        throw CalibError(ErrorCode::InvalidArgument, "experiment config: expected an object");
    }
    static const std::vector<std::string> known = {
        "geometry",     "rig",           "view_count",     "angle_margin",
        "shift_range",  "lambda_range",  "jitter_range",   "noise_levels",
        "pixel_size",   "n_realizations", "seed",          "resample_scenario"};
    for (const auto& item : value.items()) {
        if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
            throw CalibError(ErrorCode::InvalidArgument,
                             fmt::format("experiment config: unknown key \"{}\"", item.key()));
        }
    }
    if (!value.contains("rig")) {
        throw CalibError(ErrorCode::InvalidArgument, "experiment config: missing \"rig\"");
    }

    ExperimentConfig config;
    RigFile rig = rig_from_json(value["rig"]);
    config.geometry = rig.geometry;
    config.parallel_rig = rig.parallel;
    config.fanbeam_rig = rig.fanbeam;
    if (value.contains("geometry") &&
        geometry_from_string(value["geometry"].get<std::string>()) != rig.geometry) {
        throw CalibError(ErrorCode::InvalidArgument,
                         "experiment config: geometry disagrees with the rig's");
    }

    if (value.contains("view_count")) {
        config.view_count = static_cast<int>(require_number(value, "view_count"));
    }
    if (value.contains("angle_margin")) {
        config.angle_margin = require_number(value, "angle_margin");
    }
    if (value.contains("shift_range")) {
        config.shift_range = interval_from_json(value["shift_range"], "shift_range");
    }
    if (value.contains("lambda_range")) {
        config.lambda_range = interval_from_json(value["lambda_range"], "lambda_range");
    }
    if (value.contains("jitter_range")) {
        config.jitter_range = interval_from_json(value["jitter_range"], "jitter_range");
    }
    if (value.contains("noise_levels")) {
        if (!value["noise_levels"].is_array()) {
            throw CalibError(ErrorCode::InvalidArgument,
                             "experiment config: \"noise_levels\" must be an array");
        }
        config.noise_levels.clear();
        for (const auto& level : value["noise_levels"]) {
            if (!level.is_number()) {
                throw CalibError(ErrorCode::InvalidArgument,
                                 "experiment config: noise levels must be numbers");
            }
            config.noise_levels.push_back(level.get<double>());
        }
    }
    if (value.contains("pixel_size")) config.pixel_size = require_number(value, "pixel_size");
    if (value.contains("n_realizations")) {
        config.n_realizations = static_cast<int>(require_number(value, "n_realizations"));
    }
    if (value.contains("seed")) {
        if (!value["seed"].is_number_unsigned() && !value["seed"].is_number_integer()) {
            throw CalibError(ErrorCode::InvalidArgument,
                             "experiment config: \"seed\" must be an integer");
        }
        config.seed = value["seed"].get<std::uint64_t>();
    }
    if (value.contains("resample_scenario")) {
        if (!value["resample_scenario"].is_boolean()) {
            throw CalibError(ErrorCode::InvalidArgument,
                             "experiment config: \"resample_scenario\" must be a boolean");
        }
        config.resample_scenario = value["resample_scenario"].get<bool>();
    }
    return config;
}

json experiment_config_to_json(const ExperimentConfig& config) {
    RigFile rig;
    rig.geometry = config.geometry;
    rig.parallel = config.parallel_rig;
    rig.fanbeam = config.fanbeam_rig;

    json value;
    value["geometry"] = to_string(config.geometry);
    value["rig"] = rig_to_json(rig);
    value["view_count"] = config.view_count;
    value["angle_margin"] = config.angle_margin;
    value["shift_range"] = json::array({config.shift_range.lo, config.shift_range.hi});
    value["lambda_range"] = json::array({config.lambda_range.lo, config.lambda_range.hi});
    value["jitter_range"] = json::array({config.jitter_range.lo, config.jitter_range.hi});
    value["noise_levels"] = config.noise_levels;
    value["pixel_size"] = config.pixel_size;
    value["n_realizations"] = config.n_realizations;
    value["seed"] = config.seed;
    value["resample_scenario"] = config.resample_scenario;
    return value;
}

std::string format_double(double x) {
    return fmt::format("{:.17g}", x);
}

std::string config_hash_hex(const json& value) {
    const std::string dump = value.dump();
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char c : dump) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return fmt::format("{:016x}", hash);
}

std::string iso8601_utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm utc{};
    gmtime_r(&now, &utc);
    return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}Z", utc.tm_year + 1900,
                       utc.tm_mon + 1, utc.tm_mday, utc.tm_hour, utc.tm_min, utc.tm_sec);
}

}  // namespace tomocal::io
