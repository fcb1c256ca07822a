#include "frfit/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "frfit/model.hpp"

namespace frfit {

namespace {

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

double parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw std::invalid_argument("bad numeric field: '" + std::string(s) + "'");
    return out;
}

std::string trimmed(std::string s) {
    const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
    while (!s.empty() && is_space(s.front())) s.erase(s.begin());
    while (!s.empty() && is_space(s.back())) s.pop_back();
    return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(trimmed(field));
    return out;
}

void atomic_write(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::invalid_argument("cannot open for writing: " + tmp);
        f << contents;
        if (!f) throw std::invalid_argument("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

nlohmann::json complex_list(const CVec& v) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out.push_back({v(i).real(), v(i).imag()});
    return out;
}

CVec complex_list_parse(const nlohmann::json& j) {
    CVec out(j.size());
    for (size_t i = 0; i < j.size(); ++i)
        out(static_cast<Eigen::Index>(i)) = Cplx(j[i][0].get<double>(), j[i][1].get<double>());
    return out;
}

}  // namespace

void write_dataset_csv(const std::string& path, const FrequencyResponseData& data) {
    data.validate();
    std::string out;
    out.reserve(64 * data.size());
    out += "freq_rad_s";
    for (int a = 0; a < data.outputs; ++a) {
        for (int b = 0; b < data.inputs; ++b) {
            const std::string tag = "y" + std::to_string(a + 1) + "u" + std::to_string(b + 1);
            out += ",re_" + tag + ",im_" + tag;
        }
    }
    if (data.weights) out += ",weight";
    out += "\n";
    for (int i = 0; i < data.size(); ++i) {
        out += format_double(data.frequencies(i));
        for (int a = 0; a < data.outputs; ++a) {
            for (int b = 0; b < data.inputs; ++b) {
                out += "," + format_double(data.responses[i](a, b).real());
                out += "," + format_double(data.responses[i](a, b).imag());
            }
        }
        if (data.weights) out += "," + format_double((*data.weights)(i));
        out += "\n";
    }
    atomic_write(path, out);
}

FrequencyResponseData read_dataset_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open dataset file: " + path);
    std::string line;
    if (!std::getline(f, line)) throw std::invalid_argument("empty dataset file: " + path);

    const std::vector<std::string> header = split_csv_line(line);
    if (header.empty()) throw std::invalid_argument("missing header row");
    double freq_scale = 1.0;
    if (header[0] == "freq_rad_s") {
        freq_scale = 1.0;
    } else if (header[0] == "freq_hz") {
        freq_scale = 2.0 * std::numbers::pi;
    } else {
        throw std::invalid_argument("first column must be freq_rad_s or freq_hz");
    }
    bool has_weight = !header.empty() && header.back() == "weight";
    const size_t response_cols = header.size() - 1 - (has_weight ? 1 : 0);
    if (response_cols == 0 || response_cols % 2 != 0)
        throw std::invalid_argument("expected re_/im_ column pairs");

    // channel grid from the last re_ tag
    int outputs = 1, inputs = 1;
    {
        const std::string& last = header[1 + response_cols - 2];
        int a = 0, b = 0;
        if (std::sscanf(last.c_str(), "re_y%du%d", &a, &b) == 2) {
            outputs = a;
            inputs = b;
        }
        if (static_cast<size_t>(outputs) * inputs * 2 != response_cols)
            throw std::invalid_argument("channel headers do not match column count");
    }

    FrequencyResponseData data;
    data.outputs = outputs;
    data.inputs = inputs;
    std::vector<double> freqs;
    std::vector<double> ws;
    while (std::getline(f, line)) {
        if (trimmed(line).empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw std::invalid_argument("row has wrong field count");
        freqs.push_back(parse_double(fields[0]) * freq_scale);
        CMat h(outputs, inputs);
        size_t col = 1;
        for (int a = 0; a < outputs; ++a) {
            for (int b = 0; b < inputs; ++b) {
                const double re = parse_double(fields[col++]);
                const double im = parse_double(fields[col++]);
                h(a, b) = Cplx(re, im);
            }
        }
        data.responses.push_back(std::move(h));
        if (has_weight) ws.push_back(parse_double(fields[col]));
    }
    data.frequencies = Eigen::Map<Vec>(freqs.data(), static_cast<Eigen::Index>(freqs.size()));
    if (has_weight)
        data.weights = Eigen::Map<Vec>(ws.data(), static_cast<Eigen::Index>(ws.size()));
    data.validate();
    return data;
}

Vec read_weight_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open weight file: " + path);
    std::vector<double> ws;
    std::string line;
    while (std::getline(f, line)) {
        const std::string t = trimmed(line);
        if (t.empty()) continue;
        ws.push_back(parse_double(t));
    }
    return Eigen::Map<Vec>(ws.data(), static_cast<Eigen::Index>(ws.size()));
}

void write_model_json(const std::string& path, const RationalModel& model,
                      const ModelFileMetadata& meta) {
    RationalModel m = model;
    materialize_coefficients(m);

    nlohmann::json j;
    j["version"] = kToolVersion;
    j["domain"] = m.domain == Domain::SPlane ? "s" : "q";
    j["outputs"] = m.outputs;
    j["inputs"] = m.inputs;

    nlohmann::json den = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.den_coeffs->size(); ++i) den.push_back((*m.den_coeffs)(i));
    j["denominator"] = den;
    nlohmann::json nums = nlohmann::json::array();
    for (const Vec& n : *m.num_coeffs) {
        nlohmann::json c = nlohmann::json::array();
        for (Eigen::Index i = 0; i < n.size(); ++i) c.push_back(n(i));
        nums.push_back(c);
    }
    j["numerators"] = nums;

    j["poles"] = complex_list(m.poles);
    nlohmann::json zeros = nlohmann::json::array();
    for (const CVec& z : m.zeros) zeros.push_back(complex_list(z));
    j["zeros"] = zeros;
    nlohmann::json gains = nlohmann::json::array();
    for (int a = 0; a < m.outputs; ++a)
        for (int b = 0; b < m.inputs; ++b) gains.push_back(m.gains(a, b));
    j["gains"] = gains;

    if (meta.has_fit) {
        j["fit"] = {{"nrmse_percent", meta.nrmse_percent},
                    {"final_cost", meta.final_cost},
                    {"sk_iterations", meta.sk_iterations},
                    {"iv_iterations", meta.iv_iterations},
                    {"worst_condition_number", meta.worst_condition_number},
                    {"best_stage", meta.best_stage}};
    }
    if (!meta.constraints_echo.empty()) j["constraints"] = meta.constraints_echo;

    atomic_write(path, j.dump(2) + "\n");
}

RationalModel read_model_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open model file: " + path);
    nlohmann::json j;
    f >> j;

    const int outputs = j["outputs"].get<int>();
    const int inputs = j["inputs"].get<int>();
    Vec den(j["denominator"].size());
    for (size_t i = 0; i < j["denominator"].size(); ++i)
        den(static_cast<Eigen::Index>(i)) = j["denominator"][i].get<double>();
    std::vector<Vec> nums;
    for (const auto& jn : j["numerators"]) {
        Vec n(jn.size());
        for (size_t i = 0; i < jn.size(); ++i) n(static_cast<Eigen::Index>(i)) = jn[i].get<double>();
        nums.push_back(std::move(n));
    }
    RationalModel m = model_from_coefficients(
        nums, den, outputs, inputs,
        j["domain"].get<std::string>() == "s" ? Domain::SPlane : Domain::QDisk);
    if (j.contains("poles")) m.poles = complex_list_parse(j["poles"]);
    return m;
}

}  // namespace frfit
