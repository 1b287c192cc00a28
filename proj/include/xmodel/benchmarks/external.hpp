#pragma once

#include <fstream>
#include <map>
#include <string>

#include "xmodel/benchmarks/models.hpp"
#include "xmodel/text.hpp"

namespace xmodel::bench {

/**
 * @brief Third-party forecasts imported from CSV for scoring.
 *
 * Format: `model,date,hour,point[,mean,sd]`. The optional mean/sd pair adds
 * a Gaussian density so the import can participate in coverage reports.
 */
class ExternalForecasts {
public:
    struct Entry {
        double point = 0.0;
        bool has_density = false;
        double mean = 0.0;
        double sd = 0.0;
    };

    void load(std::istream& in) {
        std::string line;
        std::size_t lineno = 0;
        if (!std::getline(in, line)) throw ParseError("empty external forecast file", 1);
        ++lineno;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string_view sv = strip_cr(line);
            if (sv.empty()) continue;
            const auto fields = split_csv(sv);
            if (fields.size() != 4 && fields.size() != 6) {
                throw ParseError("expected model,date,hour,point[,mean,sd]", lineno);
            }
            Entry entry;
            entry.point = parse_double(fields[3], lineno);
            if (fields.size() == 6) {
                entry.has_density = true;
                entry.mean = parse_double(fields[4], lineno);
                entry.sd = parse_double(fields[5], lineno);
            }
            const Date date = Date::parse(std::string(fields[0 + 1]));
            const long hour = parse_long(fields[2], lineno);
            if (hour < 0 || hour > 23) throw ValidationError("hour out of range", lineno);
            data_[std::string(fields[0])][{date.serial(), static_cast<int>(hour)}] = entry;
        }
    }

    void load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open external forecast file: " + path);
        load(in);
    }

    std::vector<std::string> models() const {
        std::vector<std::string> out;
        for (const auto& [id, table] : data_) out.push_back(id);
        return out;
    }

    const std::map<std::pair<std::int64_t, int>, Entry>* table(const std::string& model) const {
        auto it = data_.find(model);
        return it == data_.end() ? nullptr : &it->second;
    }

private:
    std::map<std::string, std::map<std::pair<std::int64_t, int>, Entry>> data_;
};

/// Adapts one imported model to the benchmark interface.
class ExternalModel : public BenchmarkModel {
public:
    ExternalModel(std::string id, const ExternalForecasts& store)
        : id_(std::move(id)), store_(&store) {}

    std::string id() const override { return id_; }

    BenchmarkForecast forecast(const PanelDataset& panel, std::size_t /*w_begin*/,
                               std::size_t target) const override {
        const auto* table = store_->table(id_);
        if (!table) throw ConfigError("no external forecasts for model " + id_);
        BenchmarkForecast out;
        out.model = id_;
        const std::int64_t serial = panel.date(target).serial();
        for (int h = 0; h < 24; ++h) {
            auto it = table->find({serial, h});
            if (it == table->end()) {
                throw MissingExogenousError("external forecast missing for " +
                                            panel.date(target).to_string() + " hour " +
                                            std::to_string(h));
            }
            out.point[h] = it->second.point;
            if (it->second.has_density) {
                out.density[h].weights = {1.0};
                out.density[h].means = {it->second.mean};
                out.density[h].sds = {it->second.sd};
            } else {
                out.density[h].weights = {1.0};
                out.density[h].means = {it->second.point};
                out.density[h].sds = {0.0};
            }
        }
        return out;
    }

private:
    std::string id_;
    const ExternalForecasts* store_;
};

}  // namespace xmodel::bench
