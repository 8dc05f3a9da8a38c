#include "nvmflow/neuro/macromodel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

namespace nvmflow::neuro {

namespace {

constexpr int kChunks = 4; // fixed split of each minibatch, independent of jobs

Eigen::MatrixXd to_matrix(const Dataset& d, const std::vector<size_t>& idx, size_t begin, size_t end)
{
    const int n = d.pixels_per_image();
    Eigen::MatrixXd X(n, end - begin);
    for (size_t k = begin; k < end; ++k) {
        const auto img = d.image(idx[k]);
        for (int p = 0; p < n; ++p) X(p, k - begin) = img[p] / 255.0;
    }
    return X;
}

} // namespace

void MacromodelConfig::validate() const
{
    if (layers.size() < 2) throw std::invalid_argument("macromodel: need at least 2 layers");
    for (int n : layers)
        if (n < 1) throw std::invalid_argument("macromodel: layer sizes must be >= 1");
    if (levels != 0 && levels < 2) throw std::invalid_argument("macromodel: level count must be >= 2 (or 0 for continuous)");
    if (batch_size < 1) throw std::invalid_argument("macromodel: batch size must be >= 1");
    if (epochs < 1) throw std::invalid_argument("macromodel: epochs must be >= 1");
    if (!(learning_rate > 0)) throw std::invalid_argument("macromodel: learning rate must be > 0");
    if (!(range_sigmas > 0)) throw std::invalid_argument("macromodel: range must be > 0");
    if (jobs < 1) throw std::invalid_argument("macromodel: jobs must be >= 1");
}

Mlp::Mlp(std::vector<int> layers, std::uint64_t seed) : layers_(std::move(layers))
{
    std::mt19937_64 rng(seed);
    for (size_t l = 0; l + 1 < layers_.size(); ++l) {
        std::normal_distribution<double> n(0.0, std::sqrt(2.0 / layers_[l]));
        Eigen::MatrixXd w(layers_[l + 1], layers_[l]);
        for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = n(rng);
        w_.push_back(std::move(w));
        b_.push_back(Eigen::VectorXd::Zero(layers_[l + 1]));
    }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& X) const
{
    Eigen::MatrixXd a = X;
    for (int l = 0; l < depth(); ++l) {
        Eigen::MatrixXd z = (w_[l] * a).colwise() + b_[l];
        if (l + 1 < depth()) {
            a = z.cwiseMax(0.0);
        } else {
            const Eigen::RowVectorXd m = z.colwise().maxCoeff();
            z.rowwise() -= m;
            z = z.array().exp();
            a = z.array().rowwise() / z.colwise().sum().array();
        }
    }
    return a;
}

double Mlp::loss(const Eigen::MatrixXd& X, const std::vector<int>& y) const
{
    return gradient(X, y).loss_sum / X.cols();
}

Mlp::Gradient Mlp::gradient(const Eigen::MatrixXd& X, const std::vector<int>& y) const
{
    std::vector<Eigen::MatrixXd> acts{X};
    for (int l = 0; l < depth(); ++l) {
        Eigen::MatrixXd z = (w_[l] * acts.back()).colwise() + b_[l];
        if (l + 1 < depth()) {
            acts.push_back(z.cwiseMax(0.0));
        } else {
            const Eigen::RowVectorXd m = z.colwise().maxCoeff();
            z.rowwise() -= m;
            const Eigen::RowVectorXd lse = z.array().exp().colwise().sum().log();
            acts.push_back((z.rowwise() - lse).array().exp());
        }
    }
    Gradient g;
    g.w.resize(depth());
    g.b.resize(depth());
    Eigen::MatrixXd delta = acts.back();
    for (Eigen::Index k = 0; k < X.cols(); ++k) {
        g.loss_sum -= std::log(std::max(acts.back()(y[k], k), 1e-300));
        delta(y[k], k) -= 1.0;
    }
    for (int l = depth() - 1; l >= 0; --l) {
        g.w[l] = delta * acts[l].transpose();
        g.b[l] = delta.rowwise().sum();
        if (l > 0) delta = (w_[l].transpose() * delta).cwiseProduct((acts[l].array() > 0).cast<double>().matrix());
    }
    return g;
}

double Mlp::step(int l, int levels, double range_sigmas) const
{
    if (levels == 0) return 0;
    return range_sigmas * std::sqrt(2.0 / layers_[l]) / (levels - 1);
}

void Mlp::quantize(int levels, double range_sigmas)
{
    if (levels == 0) return;
    for (int l = 0; l < depth(); ++l) {
        const double s = step(l, levels, range_sigmas);
        const double k_max = levels - 1;
        auto q = [&](double v) { return s * std::clamp(std::nearbyint(v / s), -k_max, k_max); };
        w_[l] = w_[l].unaryExpr(q);
        b_[l] = b_[l].unaryExpr(q);
    }
}

SynapseAudit audit_synapses(const std::vector<int>& layers)
{
    SynapseAudit a;
    for (size_t l = 0; l + 1 < layers.size(); ++l) {
        a.weights += static_cast<long long>(layers[l]) * layers[l + 1];
        a.biases += layers[l + 1];
    }
    return a;
}

double accuracy(const Mlp& net, const Dataset& d, std::vector<std::vector<long>>* confusion)
{
    const int classes = net.layers().back();
    if (confusion) confusion->assign(classes, std::vector<long>(classes, 0));
    std::vector<size_t> idx(d.size());
    std::iota(idx.begin(), idx.end(), 0);
    long correct = 0;
    for (size_t begin = 0; begin < d.size(); begin += 1000) {
        const size_t end = std::min(d.size(), begin + 1000);
        const Eigen::MatrixXd p = net.forward(to_matrix(d, idx, begin, end));
        for (size_t k = begin; k < end; ++k) {
            Eigen::Index pred;
            p.col(k - begin).maxCoeff(&pred);
            correct += pred == d.labels[k];
            if (confusion && d.labels[k] < classes) ++(*confusion)[d.labels[k]][pred];
        }
    }
    return d.size() ? double(correct) / d.size() : 0.0;
}

namespace {

MacromodelReport run(const MacromodelConfig& cfg, const Dataset& train, const Dataset& test)
{
    if (cfg.layers.front() != train.pixels_per_image())
        throw std::invalid_argument("macromodel: input layer has " + std::to_string(cfg.layers.front()) +
                                    " units, images have " + std::to_string(train.pixels_per_image()) + " pixels");
    if (train.size() == 0) throw std::invalid_argument("macromodel: empty training set");

    MacromodelReport rep;
    rep.config = cfg;
    Mlp net(cfg.layers, cfg.seed);
    net.quantize(cfg.levels, cfg.range_sigmas);

    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
    std::vector<size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        for (size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng() % (i + 1)]);
        double loss_sum = 0;
        for (size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
            const size_t end = std::min(order.size(), begin + cfg.batch_size);
            const size_t n = end - begin;
            std::array<Mlp::Gradient, kChunks> parts;
            auto work = [&](int c) {
                const size_t a = begin + n * c / kChunks, b = begin + n * (c + 1) / kChunks;
                if (a == b) return;
                std::vector<int> y;
                for (size_t k = a; k < b; ++k) y.push_back(train.labels[order[k]]);
                parts[c] = net.gradient(to_matrix(train, order, a, b), y);
            };
            if (cfg.jobs == 1) {
                for (int c = 0; c < kChunks; ++c) work(c);
            } else {
                std::vector<std::thread> pool;
                for (int t = 0; t < std::min(cfg.jobs, kChunks); ++t)
                    pool.emplace_back([&, t] {
                        for (int c = t; c < kChunks; c += cfg.jobs) work(c);
                    });
                for (auto& th : pool) th.join();
            }
            const double scale = cfg.learning_rate / n;
            for (int c = 0; c < kChunks; ++c) {
                if (parts[c].w.empty()) continue;
                loss_sum += parts[c].loss_sum;
                for (int l = 0; l < net.depth(); ++l) {
                    net.weights(l) -= scale * parts[c].w[l];
                    net.biases(l) -= scale * parts[c].b[l];
                }
            }
            net.quantize(cfg.levels, cfg.range_sigmas);
        }
        EpochStats s;
        s.epoch = epoch;
        s.loss = loss_sum / train.size();
        s.train_accuracy = accuracy(net, train);
        s.test_accuracy = accuracy(net, test, &rep.confusion);
        rep.history.push_back(s);
    }
    rep.test_accuracy = rep.history.back().test_accuracy;
    return rep;
}

} // namespace

MacromodelReport train_macromodel(const MacromodelConfig& cfg, const Dataset& train, const Dataset& test,
                                  bool with_baseline)
{
    cfg.validate();
    MacromodelReport rep = run(cfg, train, test);
    if (cfg.continuous()) {
        rep.has_baseline = true;
        rep.baseline_test_accuracy = rep.test_accuracy;
    } else if (with_baseline) {
        MacromodelConfig base = cfg;
        base.levels = 0;
        rep.has_baseline = true;
        rep.baseline_test_accuracy = run(base, train, test).test_accuracy;
    }
    return rep;
}

void MacromodelReport::write_csv(std::ostream& os, const std::vector<std::string>& metadata) const
{
    for (const auto& m : metadata) os << "# " << m << '\n';
    os << "epoch,train_acc,test_acc,loss\n";
    char buf[128];
    for (const auto& e : history) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", e.epoch, e.train_accuracy, e.test_accuracy, e.loss);
        os << buf;
    }
}

} // namespace nvmflow::neuro
