#include "cvqkd/ldpc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "cvqkd/rng.hpp"

namespace cvqkd {

namespace {

void shuffle_u32(std::vector<int32_t>& v, CounterRng& rng) {
    for (size_t i = v.size(); i > 1; --i) {
        const size_t j = static_cast<size_t>(rng.next_u64() % i);
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace

MetDegreeTable demo_met_table_rate005() {
    // Degree-2/3 core over edge type 1, dense type-2 edges into extension
    // checks, each extension check terminating one degree-1 variable.
    MetDegreeTable t;
    t.n_edge_types = 3;
    t.vars = {
        {0.048, {2, 47, 0}},
        {0.012, {3, 47, 0}},
        {0.940, {0, 0, 1}},
    };
    t.chks = {
        {0.008, {13, 0, 0}},
        {0.002, {14, 0, 0}},
        {0.940, {0, 3, 1}},
    };
    return t;
}

int LdpcCode::n_punctured() const {
    int p = 0;
    for (uint8_t b : punctured) p += b;
    return p;
}

double LdpcCode::effective_rate() const {
    const int k = n - m;
    return static_cast<double>(k) / static_cast<double>(n - n_punctured());
}

LdpcCode met_construct(int n, const MetDegreeTable& table, uint64_t seed) {
    if (n <= 0 || table.n_edge_types <= 0) {
        throw std::invalid_argument("met_construct: bad arguments");
    }
    auto rng = CounterRng(seed, 0xC0DE);

    // Node counts per class (rounded, remainder onto the largest class).
    std::vector<int> vcount(table.vars.size()), ccount(table.chks.size());
    int vsum = 0;
    for (size_t c = 0; c < table.vars.size(); ++c) {
        vcount[c] = static_cast<int>(std::lround(table.vars[c].fraction * n));
        vsum += vcount[c];
    }
    vcount[std::max_element(vcount.begin(), vcount.end()) - vcount.begin()] += n - vsum;
    int m = 0;
    for (size_t c = 0; c < table.chks.size(); ++c) {
        ccount[c] = static_cast<int>(std::lround(table.chks[c].fraction * n));
        m += ccount[c];
    }

    LdpcCode code;
    code.n = n;
    code.m = m;
    code.code_rate = 1.0 - static_cast<double>(m) / n;
    code.chk_adj.assign(static_cast<size_t>(m), {});
    code.var_adj.assign(static_cast<size_t>(n), {});
    code.punctured.assign(static_cast<size_t>(n), 0);

    // Node id ranges per class.
    std::vector<int> vbase(table.vars.size() + 1, 0), cbase(table.chks.size() + 1, 0);
    for (size_t c = 0; c < table.vars.size(); ++c) vbase[c + 1] = vbase[c] + vcount[c];
    for (size_t c = 0; c < table.chks.size(); ++c) cbase[c + 1] = cbase[c] + ccount[c];

    for (int t = 0; t < table.n_edge_types; ++t) {
        std::vector<int32_t> vsock, csock;
        for (size_t c = 0; c < table.vars.size(); ++c) {
            const int d = table.vars[c].degrees[static_cast<size_t>(t)];
            for (int v = vbase[c]; v < vbase[c + 1]; ++v) {
                for (int k = 0; k < d; ++k) vsock.push_back(v);
            }
        }
        for (size_t c = 0; c < table.chks.size(); ++c) {
            const int d = table.chks[c].degrees[static_cast<size_t>(t)];
            for (int ch = cbase[c]; ch < cbase[c + 1]; ++ch) {
                for (int k = 0; k < d; ++k) csock.push_back(ch);
            }
        }
        // Rounding slop: trim the longer side at random.
        while (csock.size() > vsock.size()) {
            csock.erase(csock.begin() +
                        static_cast<long long>(rng.next_u64() % csock.size()));
        }
        while (vsock.size() > csock.size()) {
            vsock.erase(vsock.begin() +
                        static_cast<long long>(rng.next_u64() % vsock.size()));
        }
        shuffle_u32(csock, rng);

        // Connect, repairing parallel edges by swapping with a later socket.
        for (size_t i = 0; i < vsock.size(); ++i) {
            const int v = vsock[i];
            int ch = csock[i];
            auto& adj = code.var_adj[static_cast<size_t>(v)];
            int tries = 0;
            while (std::find(adj.begin(), adj.end(), ch) != adj.end() && tries < 32) {
                const size_t j = i + 1 < csock.size()
                                     ? i + 1 + static_cast<size_t>(rng.next_u64() %
                                                                   (csock.size() - i - 1))
                                     : i;
                std::swap(csock[i], csock[j]);
                ch = csock[i];
                ++tries;
            }
            adj.push_back(ch);
            code.chk_adj[static_cast<size_t>(ch)].push_back(v);
        }
    }

    // Puncturable pool: variables with total degree > 1 (the core).
    for (int v = 0; v < n; ++v) {
        if (code.var_adj[static_cast<size_t>(v)].size() > 1) {
            code.puncturable.push_back(v);
        }
    }
    return code;
}

void write_code(const std::string& path, const LdpcCode& code) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_code: cannot open " + path);
    f << code.n << ' ' << code.m << ' ' << code.code_rate << '\n';
    for (int c = 0; c < code.m; ++c) {
        for (int32_t v : code.chk_adj[static_cast<size_t>(c)]) {
            f << c << ' ' << v << '\n';
        }
    }
}

LdpcCode read_code(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("read_code: cannot open " + path);
    LdpcCode code;
    if (!(f >> code.n >> code.m >> code.code_rate)) {
        throw std::runtime_error("read_code: bad header");
    }
    code.chk_adj.assign(static_cast<size_t>(code.m), {});
    code.var_adj.assign(static_cast<size_t>(code.n), {});
    code.punctured.assign(static_cast<size_t>(code.n), 0);
    int c, v;
    while (f >> c >> v) {
        if (c < 0 || c >= code.m || v < 0 || v >= code.n) {
            throw std::runtime_error("read_code: edge out of range");
        }
        code.chk_adj[static_cast<size_t>(c)].push_back(v);
        code.var_adj[static_cast<size_t>(v)].push_back(c);
    }
    for (int vv = 0; vv < code.n; ++vv) {
        if (code.var_adj[static_cast<size_t>(vv)].size() > 1) {
            code.puncturable.push_back(vv);
        }
    }
    return code;
}

std::vector<uint8_t> syndrome_of(const LdpcCode& code, const std::vector<uint8_t>& bits) {
    if (bits.size() != static_cast<size_t>(code.n)) {
        throw std::invalid_argument("syndrome_of: bit length mismatch");
    }
    std::vector<uint8_t> syn(static_cast<size_t>(code.m), 0);
    for (int c = 0; c < code.m; ++c) {
        uint8_t s = 0;
        for (int32_t v : code.chk_adj[static_cast<size_t>(c)]) {
            s ^= bits[static_cast<size_t>(v)];
        }
        syn[static_cast<size_t>(c)] = s;
    }
    return syn;
}

DecodeResult bp_decode(const LdpcCode& code, const std::vector<double>& llrs,
                       const std::vector<uint8_t>& syndrome, int max_iters) {
    if (llrs.size() != static_cast<size_t>(code.n)) {
        throw std::invalid_argument("bp_decode: llr length mismatch");
    }
    if (syndrome.size() != static_cast<size_t>(code.m)) {
        throw std::invalid_argument("bp_decode: syndrome length mismatch");
    }

    // Flattened edge arrays per check.
    std::vector<int> coff(static_cast<size_t>(code.m) + 1, 0);
    for (int c = 0; c < code.m; ++c) {
        coff[static_cast<size_t>(c) + 1] =
            coff[static_cast<size_t>(c)] +
            static_cast<int>(code.chk_adj[static_cast<size_t>(c)].size());
    }
    const int ne = coff.back();
    std::vector<int32_t> evar(static_cast<size_t>(ne));
    for (int c = 0; c < code.m; ++c) {
        int k = coff[static_cast<size_t>(c)];
        for (int32_t v : code.chk_adj[static_cast<size_t>(c)]) {
            evar[static_cast<size_t>(k++)] = v;
        }
    }

    std::vector<double> v2c(static_cast<size_t>(ne)), c2v(static_cast<size_t>(ne), 0.0);
    for (int e = 0; e < ne; ++e) {
        v2c[static_cast<size_t>(e)] = llrs[static_cast<size_t>(evar[static_cast<size_t>(e)])];
    }

    DecodeResult res;
    res.bits.assign(static_cast<size_t>(code.n), 0);
    std::vector<double> total(static_cast<size_t>(code.n));

    constexpr double kClamp = 0.999999999999;
    for (int it = 1; it <= max_iters; ++it) {
        // Check pass (tanh rule, syndrome sign folded into the product).
        for (int c = 0; c < code.m; ++c) {
            const int b = coff[static_cast<size_t>(c)], e1 = coff[static_cast<size_t>(c) + 1];
            double prod = syndrome[static_cast<size_t>(c)] ? -1.0 : 1.0;
            for (int e = b; e < e1; ++e) {
                double t = std::tanh(0.5 * v2c[static_cast<size_t>(e)]);
                t = std::clamp(t, -kClamp, kClamp);
                if (t == 0.0) t = 1e-12;
                v2c[static_cast<size_t>(e)] = t;  // reuse storage for tanh values
                prod *= t;
            }
            for (int e = b; e < e1; ++e) {
                const double ex = prod / v2c[static_cast<size_t>(e)];
                c2v[static_cast<size_t>(e)] =
                    2.0 * std::atanh(std::clamp(ex, -kClamp, kClamp));
            }
        }
        // Variable pass.
        std::copy(llrs.begin(), llrs.end(), total.begin());
        for (int e = 0; e < ne; ++e) {
            total[static_cast<size_t>(evar[static_cast<size_t>(e)])] +=
                c2v[static_cast<size_t>(e)];
        }
        for (int e = 0; e < ne; ++e) {
            v2c[static_cast<size_t>(e)] =
                total[static_cast<size_t>(evar[static_cast<size_t>(e)])] -
                c2v[static_cast<size_t>(e)];
        }
        // Decision + syndrome check.
        for (int v = 0; v < code.n; ++v) {
            res.bits[static_cast<size_t>(v)] = total[static_cast<size_t>(v)] < 0.0 ? 1 : 0;
        }
        res.iterations = it;
        if (syndrome_of(code, res.bits) == syndrome) {
            res.converged = true;
            return res;
        }
    }
    return res;
}

LdpcCode rate_adapt(const LdpcCode& code, double target_rate, uint64_t seed) {
    const int k = code.n - code.m;
    const double base = static_cast<double>(k) / code.n;
    if (target_rate < base - 1e-12) {
        throw std::invalid_argument("rate_adapt: target below the base rate");
    }
    const int keep = static_cast<int>(std::lround(static_cast<double>(k) / target_rate));
    const int p = code.n - keep;
    if (p < 0 || p > static_cast<int>(code.puncturable.size())) {
        throw std::invalid_argument("rate_adapt: target beyond the puncturable budget");
    }
    LdpcCode out = code;
    std::fill(out.punctured.begin(), out.punctured.end(), 0);
    if (p == 0) return out;

    auto pool = code.puncturable;
    auto rng = CounterRng(seed, 0xAD47);
    for (int i = 0; i < p; ++i) {
        const size_t j = static_cast<size_t>(i) +
                         static_cast<size_t>(rng.next_u64() % (pool.size() - static_cast<size_t>(i)));
        std::swap(pool[static_cast<size_t>(i)], pool[j]);
        out.punctured[static_cast<size_t>(pool[static_cast<size_t>(i)])] = 1;
    }
    return out;
}

}  // namespace cvqkd
