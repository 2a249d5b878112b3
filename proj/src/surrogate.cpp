#include "mobgame/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mobgame/rng.hpp"
#include "mobgame/util.hpp"

namespace mobgame {

namespace {

// Forward pass; returns activations per layer (including input), with tanh on
// every layer except the last.
std::vector<std::vector<double>> forward(const std::vector<MlpLayer>& layers,
                                         const std::vector<double>& input) {
    std::vector<std::vector<double>> acts;
    acts.push_back(input);
    for (size_t li = 0; li < layers.size(); ++li) {
        const MlpLayer& L = layers[li];
        std::vector<double> z(static_cast<size_t>(L.out), 0.0);
        const std::vector<double>& prev = acts.back();
        for (int o = 0; o < L.out; ++o) {
            double s = L.b[static_cast<size_t>(o)];
            const double* wrow = &L.w[static_cast<size_t>(o) * static_cast<size_t>(L.in)];
            for (int i = 0; i < L.in; ++i) s += wrow[i] * prev[static_cast<size_t>(i)];
            z[static_cast<size_t>(o)] = (li + 1 < layers.size()) ? std::tanh(s) : s;
        }
        acts.push_back(std::move(z));
    }
    return acts;
}

// Deterministic in-place Fisher-Yates using our own uniform draw (library
// integer distributions are implementation-defined).
void shuffle_indices(std::vector<int>& idx, std::mt19937_64& rng) {
    for (size_t i = idx.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(uniform01(rng) * static_cast<double>(i));
        if (j >= i) j = i - 1;
        std::swap(idx[i - 1], idx[j]);
    }
}

}  // namespace

std::array<double, kSurrogateOutputDim> sample_targets(const MneSample& s) {
    return {s.x_pt.q,      s.x_pt.p_base, s.x_pt.p_d,  s.x_pt.p_trans, s.x_tx.w,
            s.x_tx.p_base, s.x_tx.p_d,    s.x_tx.p_t,  s.x_tx.p_trans, s.j_sw,
            s.em_base,     s.rev_pt,      s.rev_tx,    s.tr21,         s.tr12};
}

std::array<double, kSurrogateOutputDim> SurrogateModel::predict_raw(
    const std::array<double, kSurrogateInputDim>& z) const {
    std::array<double, kSurrogateOutputDim> out{};
    if (constant_predictor || layers.empty()) {
        for (int i = 0; i < kSurrogateOutputDim; ++i) out[static_cast<size_t>(i)] = out_mean[static_cast<size_t>(i)];
        return out;
    }
    std::vector<double> x(kSurrogateInputDim);
    for (int i = 0; i < kSurrogateInputDim; ++i)
        x[static_cast<size_t>(i)] =
            (z[static_cast<size_t>(i)] - in_mean[static_cast<size_t>(i)]) / in_std[static_cast<size_t>(i)];
    std::vector<double> y = forward(layers, x).back();
    for (int i = 0; i < kSurrogateOutputDim; ++i)
        out[static_cast<size_t>(i)] =
            y[static_cast<size_t>(i)] * out_std[static_cast<size_t>(i)] + out_mean[static_cast<size_t>(i)];
    return out;
}

SurrogateModel fit_surrogate(const MneDataset& dataset, const MlpArchitecture& arch,
                             const TrainParams& params) {
    const int n = static_cast<int>(dataset.samples.size());
    if (n < 10) throw std::invalid_argument("fit_surrogate needs at least 10 records");
    if (params.epochs < 1 || params.batch_size < 1)
        throw std::invalid_argument("bad training parameters");
    for (int h : arch.hidden)
        if (h < 1) throw std::invalid_argument("hidden widths must be >= 1");

    std::vector<std::array<double, kSurrogateInputDim>> X(static_cast<size_t>(n));
    std::vector<std::array<double, kSurrogateOutputDim>> Y(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        X[static_cast<size_t>(i)] = dataset.samples[static_cast<size_t>(i)].z.to_vector();
        Y[static_cast<size_t>(i)] = sample_targets(dataset.samples[static_cast<size_t>(i)]);
        for (double v : X[static_cast<size_t>(i)])
            if (!std::isfinite(v)) throw std::invalid_argument("non-finite input in dataset");
        for (double v : Y[static_cast<size_t>(i)])
            if (!std::isfinite(v)) throw std::invalid_argument("non-finite output in dataset");
    }

    SurrogateModel m;
    m.arch = arch;
    auto mean_std = [&](auto& rows, auto& mean, auto& stdev, int dim) {
        for (int d = 0; d < dim; ++d) {
            double mu = 0.0;
            for (auto& r : rows) mu += r[static_cast<size_t>(d)];
            mu /= n;
            double var = 0.0;
            for (auto& r : rows) {
                double c = r[static_cast<size_t>(d)] - mu;
                var += c * c;
            }
            var /= n;
            mean[static_cast<size_t>(d)] = mu;
            stdev[static_cast<size_t>(d)] = var > 0.0 ? std::sqrt(var) : 1.0;
        }
    };
    mean_std(X, m.in_mean, m.in_std, kSurrogateInputDim);
    mean_std(Y, m.out_mean, m.out_std, kSurrogateOutputDim);

    bool all_const = true;
    for (int d = 0; d < kSurrogateOutputDim && all_const; ++d)
        for (int i = 0; i < n; ++i)
            if (Y[static_cast<size_t>(i)][static_cast<size_t>(d)] != Y[0][static_cast<size_t>(d)]) {
                all_const = false;
                break;
            }
    if (all_const) {
        m.constant_predictor = true;
        m.final_loss = 0.0;
        return m;
    }

    // Layer sizes: input -> hidden... -> output.
    std::vector<int> widths;
    widths.push_back(kSurrogateInputDim);
    for (int h : arch.hidden) widths.push_back(h);
    widths.push_back(kSurrogateOutputDim);

    std::mt19937_64 rng(params.seed);
    for (size_t li = 0; li + 1 < widths.size(); ++li) {
        MlpLayer L;
        L.in = widths[li];
        L.out = widths[li + 1];
        double s = std::sqrt(6.0 / (L.in + L.out));
        L.w.resize(static_cast<size_t>(L.in) * static_cast<size_t>(L.out));
        for (auto& w : L.w) w = uniform(rng, -s, s);
        L.b.assign(static_cast<size_t>(L.out), 0.0);
        m.layers.push_back(std::move(L));
    }

    // Standardized copies of the data.
    std::vector<std::vector<double>> Xs(static_cast<size_t>(n)), Ys(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        Xs[static_cast<size_t>(i)].resize(kSurrogateInputDim);
        Ys[static_cast<size_t>(i)].resize(kSurrogateOutputDim);
        for (int d = 0; d < kSurrogateInputDim; ++d)
            Xs[static_cast<size_t>(i)][static_cast<size_t>(d)] =
                (X[static_cast<size_t>(i)][static_cast<size_t>(d)] - m.in_mean[static_cast<size_t>(d)]) /
                m.in_std[static_cast<size_t>(d)];
        for (int d = 0; d < kSurrogateOutputDim; ++d)
            Ys[static_cast<size_t>(i)][static_cast<size_t>(d)] =
                (Y[static_cast<size_t>(i)][static_cast<size_t>(d)] - m.out_mean[static_cast<size_t>(d)]) /
                m.out_std[static_cast<size_t>(d)];
    }

    // Momentum buffers matching the weight layout.
    std::vector<MlpLayer> vel = m.layers;
    for (auto& L : vel) {
        std::fill(L.w.begin(), L.w.end(), 0.0);
        std::fill(L.b.begin(), L.b.end(), 0.0);
    }

    std::vector<int> order(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;

    double epoch_loss = 0.0;
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        shuffle_indices(order, rng);
        epoch_loss = 0.0;
        for (int start = 0; start < n; start += params.batch_size) {
            int stop = std::min(start + params.batch_size, n);
            int bs = stop - start;
            // Accumulated gradients.
            std::vector<MlpLayer> grad = vel;
            for (auto& L : grad) {
                std::fill(L.w.begin(), L.w.end(), 0.0);
                std::fill(L.b.begin(), L.b.end(), 0.0);
            }
            for (int bi = start; bi < stop; ++bi) {
                int i = order[static_cast<size_t>(bi)];
                auto acts = forward(m.layers, Xs[static_cast<size_t>(i)]);
                const std::vector<double>& yhat = acts.back();
                std::vector<double> delta(kSurrogateOutputDim);
                for (int d = 0; d < kSurrogateOutputDim; ++d) {
                    double err = yhat[static_cast<size_t>(d)] -
                                 Ys[static_cast<size_t>(i)][static_cast<size_t>(d)];
                    delta[static_cast<size_t>(d)] = 2.0 * err / kSurrogateOutputDim;
                    epoch_loss += err * err / kSurrogateOutputDim;
                }
                for (int li = static_cast<int>(m.layers.size()) - 1; li >= 0; --li) {
                    MlpLayer& G = grad[static_cast<size_t>(li)];
                    const MlpLayer& L = m.layers[static_cast<size_t>(li)];
                    const std::vector<double>& prev = acts[static_cast<size_t>(li)];
                    std::vector<double> delta_prev(static_cast<size_t>(L.in), 0.0);
                    for (int o = 0; o < L.out; ++o) {
                        double dv = delta[static_cast<size_t>(o)];
                        G.b[static_cast<size_t>(o)] += dv;
                        double* gw = &G.w[static_cast<size_t>(o) * static_cast<size_t>(L.in)];
                        const double* lw = &L.w[static_cast<size_t>(o) * static_cast<size_t>(L.in)];
                        for (int ii = 0; ii < L.in; ++ii) {
                            gw[ii] += dv * prev[static_cast<size_t>(ii)];
                            delta_prev[static_cast<size_t>(ii)] += dv * lw[ii];
                        }
                    }
                    if (li > 0) {
                        // Derivative of tanh at the previous layer's output.
                        for (int ii = 0; ii < L.in; ++ii) {
                            double a = prev[static_cast<size_t>(ii)];
                            delta_prev[static_cast<size_t>(ii)] *= (1.0 - a * a);
                        }
                        delta = std::move(delta_prev);
                    }
                }
            }
            for (size_t li = 0; li < m.layers.size(); ++li) {
                MlpLayer& L = m.layers[li];
                MlpLayer& V = vel[li];
                const MlpLayer& G = grad[li];
                for (size_t k = 0; k < L.w.size(); ++k) {
                    V.w[k] = params.momentum * V.w[k] - params.learning_rate * G.w[k] / bs;
                    L.w[k] += V.w[k];
                }
                for (size_t k = 0; k < L.b.size(); ++k) {
                    V.b[k] = params.momentum * V.b[k] - params.learning_rate * G.b[k] / bs;
                    L.b[k] += V.b[k];
                }
            }
        }
        epoch_loss /= n;
    }
    m.final_loss = epoch_loss;
    return m;
}

SurrogatePrediction surrogate_predict(const SurrogateModel& model, const Policy& z,
                                      const StrategyBounds& bounds) {
    auto raw = model.predict_raw(z.to_vector());
    SurrogatePrediction p;
    p.x_pt = project_pt(PtStrategy::from_vector({raw[0], raw[1], raw[2], raw[3]}), bounds);
    p.x_tx = project_tx(TxStrategy::from_vector({raw[4], raw[5], raw[6], raw[7], raw[8]}), bounds,
                        z.lambda);
    p.j_sw = std::max(0.0, raw[9]);
    p.em_base = std::max(0.0, raw[10]);
    p.rev_pt = std::max(0.0, raw[11]);
    p.rev_tx = std::max(0.0, raw[12]);
    p.tr21 = std::max(0.0, raw[13]);
    p.tr12 = std::max(0.0, raw[14]);
    return p;
}

double strategy_nrmse(const SurrogateModel& model, const MneDataset& ref,
                      const StrategyBounds& bounds) {
    if (ref.samples.empty()) throw std::invalid_argument("reference dataset is empty");
    std::array<double, kSurrogateStrategyDims> lo{}, hi{}, sse{};
    lo.fill(std::numeric_limits<double>::infinity());
    hi.fill(-std::numeric_limits<double>::infinity());
    for (const MneSample& s : ref.samples) {
        auto t = sample_targets(s);
        for (int d = 0; d < kSurrogateStrategyDims; ++d) {
            lo[static_cast<size_t>(d)] = std::min(lo[static_cast<size_t>(d)], t[static_cast<size_t>(d)]);
            hi[static_cast<size_t>(d)] = std::max(hi[static_cast<size_t>(d)], t[static_cast<size_t>(d)]);
        }
    }
    for (const MneSample& s : ref.samples) {
        auto t = sample_targets(s);
        SurrogatePrediction p = surrogate_predict(model, s.z, bounds);
        std::array<double, kSurrogateStrategyDims> pred = {
            p.x_pt.q,      p.x_pt.p_base, p.x_pt.p_d, p.x_pt.p_trans, p.x_tx.w,
            p.x_tx.p_base, p.x_tx.p_d,    p.x_tx.p_t, p.x_tx.p_trans};
        for (int d = 0; d < kSurrogateStrategyDims; ++d) {
            double err = pred[static_cast<size_t>(d)] - t[static_cast<size_t>(d)];
            sse[static_cast<size_t>(d)] += err * err;
        }
    }
    double total = 0.0;
    for (int d = 0; d < kSurrogateStrategyDims; ++d) {
        double range = hi[static_cast<size_t>(d)] - lo[static_cast<size_t>(d)];
        if (range <= 0.0) continue;  // constant dimension: no error contribution
        double rmse = std::sqrt(sse[static_cast<size_t>(d)] / static_cast<double>(ref.samples.size()));
        total += rmse / range;
    }
    return total / kSurrogateStrategyDims;
}

nlohmann::json surrogate_to_json(const SurrogateModel& m) {
    nlohmann::json layers = nlohmann::json::array();
    for (const MlpLayer& L : m.layers) {
        layers.push_back({{"b", L.b}, {"in", L.in}, {"out", L.out}, {"w", L.w}});
    }
    return nlohmann::json{{"architecture",
                           {{"hidden", m.arch.hidden},
                            {"input", kSurrogateInputDim},
                            {"output", kSurrogateOutputDim}}},
                          {"constant_predictor", m.constant_predictor},
                          {"final_loss", m.final_loss},
                          {"in_mean", m.in_mean},
                          {"in_std", m.in_std},
                          {"layers", layers},
                          {"out_mean", m.out_mean},
                          {"out_std", m.out_std}};
}

SurrogateModel surrogate_from_json(const nlohmann::json& j) {
    SurrogateModel m;
    if (j.at("architecture").at("input").get<int>() != kSurrogateInputDim ||
        j.at("architecture").at("output").get<int>() != kSurrogateOutputDim)
        throw std::invalid_argument("surrogate file has unexpected dimensions");
    m.arch.hidden = j.at("architecture").at("hidden").get<std::vector<int>>();
    m.constant_predictor = j.at("constant_predictor").get<bool>();
    m.final_loss = j.at("final_loss").get<double>();
    auto load_arr = [&](const char* key, auto& arr) {
        auto v = j.at(key).get<std::vector<double>>();
        if (v.size() != arr.size()) throw std::invalid_argument("surrogate file: bad array size");
        std::copy(v.begin(), v.end(), arr.begin());
    };
    load_arr("in_mean", m.in_mean);
    load_arr("in_std", m.in_std);
    load_arr("out_mean", m.out_mean);
    load_arr("out_std", m.out_std);
    for (const auto& lj : j.at("layers")) {
        MlpLayer L;
        L.in = lj.at("in").get<int>();
        L.out = lj.at("out").get<int>();
        L.w = lj.at("w").get<std::vector<double>>();
        L.b = lj.at("b").get<std::vector<double>>();
        if (L.w.size() != static_cast<size_t>(L.in) * static_cast<size_t>(L.out) ||
            L.b.size() != static_cast<size_t>(L.out))
            throw std::invalid_argument("surrogate file: bad layer shape");
        m.layers.push_back(std::move(L));
    }
    return m;
}

void save_surrogate_file(const SurrogateModel& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << surrogate_to_json(m).dump(2) << "\n";
}

SurrogateModel load_surrogate_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    nlohmann::json j;
    in >> j;
    return surrogate_from_json(j);
}

}  // namespace mobgame
