#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "uplift/dataset.hpp"
#include "uplift/error.hpp"

namespace test_helpers {

struct Row {
    std::string id;
    std::vector<double> x;
    int t = 0;
    double y = 0.0;
    std::vector<double> aux;
};

inline uplift::ExperimentDataset make_dataset(std::vector<std::string> labels,
                                              std::vector<double> propensities,
                                              const std::vector<Row>& rows,
                                              std::vector<std::string> aux_names = {}) {
    uplift::ExperimentDataset ds;
    ds.treatments = uplift::TreatmentSet(std::move(labels), std::move(propensities));
    ds.aux_names = std::move(aux_names);
    if (!rows.empty()) {
        for (std::size_t j = 0; j < rows[0].x.size(); ++j) {
            ds.feature_names.push_back("f" + std::to_string(j + 1));
        }
    }
    for (const auto& row : rows) {
        uplift::CustomerRecord rec;
        rec.id = row.id;
        rec.x = row.x;
        rec.t = row.t;
        rec.y = row.y;
        rec.aux = row.aux;
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

/// Binary-treatment dataset with a single covariate.
inline uplift::ExperimentDataset binary_dataset(const std::vector<Row>& rows,
                                                std::vector<double> propensities = {0.5, 0.5}) {
    return make_dataset({"ctrl", "msg"}, std::move(propensities), rows);
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        dir_ = std::filesystem::temp_directory_path() /
               ("uplift_test_" + tag + "_" + std::to_string(counter()++));
        std::filesystem::create_directories(dir_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(dir_, ec);
    }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }
    std::string root() const { return dir_.string(); }

private:
    static int& counter() {
        static int n = 0;
        return n;
    }
    std::filesystem::path dir_;
};

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace test_helpers
