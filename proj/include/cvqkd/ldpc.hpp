#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cvqkd {

/// Multi-edge-type degree table: every variable class lists its degree on
/// each edge type; every check class likewise. Fractions are of n (variables)
/// and of n (check count per variable) respectively.
struct MetDegreeTable {
    struct VarClass {
        double fraction;            // of n variables
        std::vector<int> degrees;   // per edge type
    };
    struct ChkClass {
        double fraction;            // checks per variable
        std::vector<int> degrees;   // per edge type
    };
    std::vector<VarClass> vars;
    std::vector<ChkClass> chks;
    int n_edge_types = 0;
};

/// Low-rate demonstration table: a small degree-2/3 core protected by dense
/// extension checks that each absorb one degree-1 variable. Rate 0.05.
MetDegreeTable demo_met_table_rate005();

struct LdpcCode {
    int n = 0;  // variable nodes
    int m = 0;  // check nodes
    double code_rate = 0.0;        // declared: 1 - m/n for the base graph
    std::vector<std::vector<int32_t>> chk_adj;  // check -> variables
    std::vector<std::vector<int32_t>> var_adj;  // variable -> checks
    std::vector<uint8_t> punctured;             // per-variable mask
    std::vector<int32_t> puncturable;           // candidate positions

    int n_punctured() const;
    /// k / (n - p) with k = n - m.
    double effective_rate() const;
};

/// Realize a random multigraph-free code from the table (socket shuffle with
/// parallel-edge repair), deterministic under seed.
LdpcCode met_construct(int n, const MetDegreeTable& table, uint64_t seed);

/// Coordinate text format: header "n m rate", then one "row col" per edge.
void write_code(const std::string& path, const LdpcCode& code);
LdpcCode read_code(const std::string& path);

struct DecodeResult {
    std::vector<uint8_t> bits;
    bool converged = false;
    int iterations = 0;
};

/// Syndrome-based sum-product decoding. llrs must have length n (punctured
/// positions carry LLR 0); syndrome has length m. Non-convergence is flagged,
/// not thrown.
DecodeResult bp_decode(const LdpcCode& code, const std::vector<double>& llrs,
                       const std::vector<uint8_t>& syndrome, int max_iters = 500);

std::vector<uint8_t> syndrome_of(const LdpcCode& code, const std::vector<uint8_t>& bits);

/// Puncture to the requested effective rate (positions drawn uniformly from
/// code.puncturable under seed). Throws std::invalid_argument when the target
/// is below the base rate or beyond the puncturable budget.
LdpcCode rate_adapt(const LdpcCode& code, double target_rate, uint64_t seed);

}  // namespace cvqkd
