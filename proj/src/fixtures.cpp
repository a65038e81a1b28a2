#include "prunelab/fixtures.hpp"

#include <stdexcept>

namespace prunelab {

namespace {

const std::vector<GroupStat> kTable1 = {
    {"resnet20-w16", 16, 15.86, 0.71},  {"resnet20-w16", 32, 19.15, 1.96},
    {"resnet20-w16", 64, 18.38, 1.70},  {"resnet20-w16", 128, 14.53, 1.30},
    {"resnet20-w32", 16, 13.37, 1.33},  {"resnet20-w32", 32, 14.03, 0.59},
    {"resnet20-w32", 64, 13.26, 0.50},  {"resnet20-w32", 128, 11.76, 1.12},
    {"resnet20-w64", 16, 10.66, 0.69},  {"resnet20-w64", 32, 10.17, 0.00},
    {"resnet20-w64", 64, 10.17, 0.00},  {"resnet20-w64", 128, 9.39, 0.25},
};

const std::vector<GroupStat> kTable2 = {
    {"resnet20-w8", 16, 6.32, 0.23},    {"resnet20-w8", 32, 7.73, 0.00},
    {"resnet20-w8", 64, 9.64, 0.86},    {"resnet20-w8", 128, 70.85, 41.22},
    {"resnet20-w16", 16, 5.43, 0.41},   {"resnet20-w16", 32, 6.16, 0.11},
    {"resnet20-w16", 64, 23.34, 22.58}, {"resnet20-w16", 128, 8.87, 0.23},
    {"resnet20-w32", 16, 4.37, 0.10},   {"resnet20-w32", 32, 5.18, 0.29},
    {"resnet20-w32", 64, 6.09, 0.29},   {"resnet20-w32", 128, 9.36, 2.49},
};

const std::vector<GroupStat> kTable3 = {
    {"mlp-256-128", 16, 5.65, 0.09},  {"mlp-256-128", 32, 5.79, 0.00},
    {"mlp-256-128", 64, 5.79, 0.00},  {"mlp-256-128", 128, 5.72, 0.09},
    {"mlp-512-256", 16, 5.40, 0.00},  {"mlp-512-256", 32, 5.40, 0.00},
    {"mlp-512-256", 64, 5.34, 0.08},  {"mlp-512-256", 128, 5.40, 0.00},
    {"mlp-1024-512", 16, 5.06, 0.00}, {"mlp-1024-512", 32, 5.06, 0.00},
    {"mlp-1024-512", 64, 5.06, 0.00}, {"mlp-1024-512", 128, 5.06, 0.00},
};

}  // namespace

const std::vector<GroupStat>& fixture_table(const std::string& name) {
    if (name == "table1") return kTable1;
    if (name == "table2") return kTable2;
    if (name == "table3") return kTable3;
    throw std::invalid_argument("unknown fixture '" + name + "' (expected table1, table2, or table3)");
}

std::vector<std::string> fixture_names() { return {"table1", "table2", "table3"}; }

}  // namespace prunelab
