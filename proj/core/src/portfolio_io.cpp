#include "claimscore/portfolio_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace claimscore {

namespace {

using nlohmann::json;

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

[[noreturn]] void fail_row(const std::filesystem::path& path, std::size_t row,
                           const std::string& what) {
    throw std::runtime_error(path.string() + ":" + std::to_string(row) + ": " + what);
}

double parse_double(const std::string& s, const std::filesystem::path& path, std::size_t row,
                    const std::string& column) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        fail_row(path, row, "cannot parse '" + s + "' in column " + column);
    }
}

long parse_long(const std::string& s, const std::filesystem::path& path, std::size_t row,
                const std::string& column) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        fail_row(path, row, "cannot parse '" + s + "' in column " + column);
    }
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void check_csv_safe(const std::string& value, const std::string& what) {
    if (value.find(',') != std::string::npos || value.find('\n') != std::string::npos)
        throw std::invalid_argument(what + " may not contain commas or newlines: '" + value + "'");
}

}  // namespace

Schema load_schema(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open schema file " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw std::runtime_error("invalid JSON in " + path.string() + ": " + e.what());
    }

    Schema schema;
    if (!doc.contains("products") || !doc["products"].is_array())
        throw std::runtime_error(path.string() + ": schema requires a 'products' array");
    for (const auto& p : doc["products"]) {
        ProductSchema ps;
        ps.name = p.at("name").get<std::string>();
        for (const auto& c : p.value("covariates", json::array())) {
            CovariateSpec spec;
            spec.name = c.at("name").get<std::string>();
            const auto kind = c.at("kind").get<std::string>();
            if (kind == "categorical") {
                spec.kind = CovariateKind::Categorical;
            } else if (kind == "continuous") {
                spec.kind = CovariateKind::Continuous;
            } else {
                throw std::runtime_error(path.string() + ": unknown covariate kind '" + kind + "'");
            }
            ps.covariates.push_back(std::move(spec));
        }
        schema.products.push_back(std::move(ps));
    }
    if (schema.products.empty())
        throw std::runtime_error(path.string() + ": schema lists no products");
    return schema;
}

void save_schema(const Schema& schema, const std::filesystem::path& path) {
    json doc;
    doc["products"] = json::array();
    for (const auto& p : schema.products) {
        json jp;
        jp["name"] = p.name;
        jp["covariates"] = json::array();
        for (const auto& c : p.covariates) {
            jp["covariates"].push_back(
                {{"name", c.name},
                 {"kind", c.kind == CovariateKind::Categorical ? "categorical" : "continuous"}});
        }
        doc["products"].push_back(std::move(jp));
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write schema file " + path.string());
    out << doc.dump(2) << '\n';
}

Portfolio load_csv(const std::filesystem::path& path, const Schema& schema) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open records file " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
    const auto header = split_line(line);
    const std::vector<std::string> fixed = {"customer_id", "product",     "calendar_year",
                                            "exposure",    "claim_count", "claim_total"};
    if (header.size() < fixed.size())
        throw std::runtime_error(path.string() + ": header is missing fixed columns");
    for (std::size_t i = 0; i < fixed.size(); ++i)
        if (header[i] != fixed[i])
            throw std::runtime_error(path.string() + ": expected column '" + fixed[i] +
                                     "' at position " + std::to_string(i + 1) + ", found '" +
                                     header[i] + "'");

    // Map covariate name -> column index; every covariate in the schema must
    // be present in the header.
    std::map<std::string, std::size_t> columns;
    for (std::size_t i = fixed.size(); i < header.size(); ++i) columns[header[i]] = i;
    for (const auto& p : schema.products)
        for (const auto& c : p.covariates)
            if (!columns.count(c.name))
                throw std::runtime_error(path.string() + ": schema covariate '" + c.name +
                                         "' missing from header");

    // Intern categorical labels so records share storage.
    std::set<std::string> interned;
    auto intern = [&interned](const std::string& s) { return *interned.insert(s).first; };

    Portfolio portfolio;
    portfolio.schema = schema;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto fields = split_line(line);
        if (fields.size() != header.size())
            fail_row(path, row,
                     "expected " + std::to_string(header.size()) + " fields, found " +
                         std::to_string(fields.size()));

        PolicyRecord rec;
        rec.customer_id = intern(fields[0]);
        rec.product = intern(fields[1]);
        rec.calendar_year = static_cast<int>(parse_long(fields[2], path, row, "calendar_year"));
        rec.exposure = parse_double(fields[3], path, row, "exposure");
        rec.claim_count = static_cast<int>(parse_long(fields[4], path, row, "claim_count"));
        rec.claim_total = parse_double(fields[5], path, row, "claim_total");

        const int pidx = schema.product_index(rec.product);
        if (pidx < 0) fail_row(path, row, "unknown product '" + rec.product + "'");
        for (const auto& spec : schema.products[pidx].covariates) {
            const auto& value = fields[columns.at(spec.name)];
            if (value.empty())
                fail_row(path, row, "missing covariate '" + spec.name + "' for product '" +
                                        rec.product + "'");
            if (spec.kind == CovariateKind::Continuous) {
                rec.covariates[spec.name] = parse_double(value, path, row, spec.name);
            } else {
                rec.covariates[spec.name] = intern(value);
            }
        }

        try {
            rec.validate();
        } catch (const std::exception& e) {
            fail_row(path, row, e.what());
        }
        portfolio.records.push_back(std::move(rec));
    }
    return portfolio;
}

void save_csv(const Portfolio& portfolio, const std::filesystem::path& path) {
    // Header: fixed columns plus the union of covariates in schema order.
    std::vector<std::string> covariate_columns;
    for (const auto& p : portfolio.schema.products)
        for (const auto& c : p.covariates)
            if (std::find(covariate_columns.begin(), covariate_columns.end(), c.name) ==
                covariate_columns.end())
                covariate_columns.push_back(c.name);

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write records file " + path.string());
    out << "customer_id,product,calendar_year,exposure,claim_count,claim_total";
    for (const auto& c : covariate_columns) out << ',' << c;
    out << '\n';

    for (const auto& r : portfolio.records) {
        check_csv_safe(r.customer_id, "customer_id");
        check_csv_safe(r.product, "product");
        out << r.customer_id << ',' << r.product << ',' << r.calendar_year << ','
            << format_double(r.exposure) << ',' << r.claim_count << ','
            << format_double(r.claim_total);
        for (const auto& c : covariate_columns) {
            out << ',';
            auto it = r.covariates.find(c);
            if (it == r.covariates.end()) continue;
            if (std::holds_alternative<double>(it->second)) {
                out << format_double(std::get<double>(it->second));
            } else {
                const auto& label = std::get<std::string>(it->second);
                check_csv_safe(label, "covariate value");
                out << label;
            }
        }
        out << '\n';
    }
}

HistoryMap load_history(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open history file " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
    const auto header = split_line(line);
    const std::vector<std::string> expected = {"customer_id", "product", "year", "exposure",
                                               "claim_count"};
    if (header != expected)
        throw std::runtime_error(path.string() +
                                 ": header must be customer_id,product,year,exposure,claim_count");

    HistoryMap history;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto fields = split_line(line);
        if (fields.size() != expected.size())
            fail_row(path, row, "expected 5 fields, found " + std::to_string(fields.size()));
        PeriodExperience exp;
        exp.year = static_cast<int>(parse_long(fields[2], path, row, "year"));
        exp.exposure = parse_double(fields[3], path, row, "exposure");
        exp.claims = static_cast<int>(parse_long(fields[4], path, row, "claim_count"));
        if (!(exp.exposure > 0.0)) fail_row(path, row, "exposure must be positive");
        if (exp.claims < 0) fail_row(path, row, "claim_count must be nonnegative");
        history[{fields[0], fields[1]}].push_back(exp);
    }
    for (auto& [key, periods] : history)
        std::sort(periods.begin(), periods.end(),
                  [](const auto& a, const auto& b) { return a.year < b.year; });
    return history;
}

void save_history(const HistoryMap& history, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write history file " + path.string());
    out << "customer_id,product,year,exposure,claim_count\n";
    for (const auto& [key, periods] : history) {
        check_csv_safe(key.first, "customer_id");
        check_csv_safe(key.second, "product");
        for (const auto& p : periods)
            out << key.first << ',' << key.second << ',' << p.year << ','
                << format_double(p.exposure) << ',' << p.claims << '\n';
    }
}

}  // namespace claimscore
