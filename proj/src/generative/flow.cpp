#include "generative/flow.hpp"

#include "autodiff/ops.hpp"
#include "common/error.hpp"
#include "common/keyvalue.hpp"
#include "common/rng.hpp"
#include "field/io.hpp"
#include "generative/result.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>

namespace ptych {

namespace fs = std::filesystem;

void validate(const FlowConfig& cfg)
{
    if (cfg.levels < 1)
        throw ConfigError("flow: levels must be at least 1");
    if (cfg.steps < 1)
        throw ConfigError("flow: steps per level must be at least 1");
    if (cfg.channels < 1 || cfg.hidden < 1)
        throw ConfigError("flow: channel counts must be positive");
    const std::size_t unit = std::size_t{1} << cfg.levels;
    if (cfg.height == 0 || cfg.width == 0 || cfg.height % unit || cfg.width % unit)
        throw ConfigError("flow: image dims " + std::to_string(cfg.height) + "x" + std::to_string(cfg.width) +
                          " must be divisible by 2^levels = " + std::to_string(unit));
    if (!(cfg.lr >= 0.0) || !std::isfinite(cfg.lr))
        throw ConfigError("flow: lr must be non-negative");
    if (cfg.batch_size < 1)
        throw ConfigError("flow: batch_size must be at least 1");
}

FlowModel::FlowModel(FlowConfig cfg) : cfg_(std::move(cfg))
{
    validate(cfg_);
    Rng rng(split_seed(cfg_.seed, Stream::Init));
    std::size_t c = cfg_.channels;
    std::size_t index = 0;
    for (std::size_t l = 0; l < cfg_.levels; ++l) {
        c *= 4;
        std::vector<Step> steps;
        for (std::size_t k = 0; k < cfg_.steps; ++k, ++index) {
            const std::string p = "step" + std::to_string(index) + ".";
            const std::size_t half = c / 2, rest = c - half;
            Step st{c, 0, 0, 0, 0, 0, 0};
            st.an_bias = params_.add(p + "actnorm.bias", {c}, std::vector<double>(c, 0.0));
            st.an_scale = params_.add(p + "actnorm.log_scale", {c}, std::vector<double>(c, 0.0));
            std::vector<double> w1(cfg_.hidden * half * 9);
            const double sd = std::sqrt(2.0 / static_cast<double>(half * 9));
            for (double& v : w1)
                v = rng.normal(0.0, sd);
            st.w1 = params_.add(p + "coupling.conv1.weight", {cfg_.hidden, half, 3, 3}, std::move(w1));
            st.b1 = params_.add(p + "coupling.conv1.bias", {cfg_.hidden}, std::vector<double>(cfg_.hidden, 0.0));
            st.w2 = params_.add(p + "coupling.conv2.weight", {2 * rest, cfg_.hidden, 3, 3},
                                std::vector<double>(2 * rest * cfg_.hidden * 9, 0.0));
            st.b2 = params_.add(p + "coupling.conv2.bias", {2 * rest}, std::vector<double>(2 * rest, 0.0));
            steps.push_back(st);

            std::vector<std::size_t> perm(c);
            std::iota(perm.begin(), perm.end(), std::size_t{0});
            for (std::size_t i = c; i > 1; --i)
                std::swap(perm[i - 1], perm[rng.below(i)]);
            perms_.push_back(std::move(perm));
        }
        levels_.push_back(std::move(steps));
        if (l + 1 < cfg_.levels)
            c /= 2;
    }
}

std::vector<std::size_t> FlowModel::level_channels() const
{
    std::vector<std::size_t> out;
    for (const auto& level : levels_)
        out.push_back(level.front().channels);
    return out;
}

namespace {

void require_finite(const ad::Tensor& t, const char* where)
{
    for (double v : t.data())
        if (!std::isfinite(v))
            throw NumericError(std::string("flow: non-finite activation in ") + where);
}

std::vector<std::size_t> inverse_permutation(const std::vector<std::size_t>& perm)
{
    std::vector<std::size_t> inv(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i)
        inv[perm[i]] = i;
    return inv;
}

} // namespace

ad::Tensor FlowModel::step_forward(const Step& st, std::size_t index, ad::Tape& tape,
                                   const std::vector<ad::Tensor>& bound, const ad::Tensor& x,
                                   std::vector<ad::Tensor>& sample_ld, std::vector<ad::Tensor>& shared_ld,
                                   ad::ParameterSet* init, const Observer& observe) const
{
    const std::size_t c = st.channels, hw = x.dim(2) * x.dim(3);
    ad::Tensor bias = bound[st.an_bias], log_scale = bound[st.an_scale];
    if (init) {
        const std::size_t n = x.dim(0);
        const double count = static_cast<double>(n * hw);
        std::vector<double> b(c), s(c);
        for (std::size_t ch = 0; ch < c; ++ch) {
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < hw; ++j)
                    sum += x.data()[(i * c + ch) * hw + j];
            const double mean = sum / count;
            double var = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < hw; ++j) {
                    const double d = x.data()[(i * c + ch) * hw + j] - mean;
                    var += d * d;
                }
            const double sd = std::sqrt(var / count);
            b[ch] = -mean;
            s[ch] = sd > 0.0 ? -std::log(sd) : 0.0;
        }
        (*init)[st.an_bias].value = b;
        (*init)[st.an_scale].value = s;
        bias = tape.constant({c}, std::move(b));
        log_scale = tape.constant({c}, std::move(s));
    }
    ad::Tensor y = ad::actnorm(x, bias, log_scale);
    if (observe)
        observe(index, "actnorm", y);
    shared_ld.push_back(ad::scale(ad::sum(log_scale), static_cast<double>(hw)));
    y = ad::permute_channels(y, perms_[index]);
    if (observe)
        observe(index, "coupling_in", y);

    const std::size_t half = c / 2;
    const ad::Tensor ya = ad::slice(y, 1, 0, half);
    const ad::Tensor yb = ad::slice(y, 1, half, c);
    const ad::Tensor hidden = ad::relu(ad::conv2d(ya, bound[st.w1], bound[st.b1]));
    const ad::Tensor st_out = ad::conv2d(hidden, bound[st.w2], bound[st.b2]);
    const ad::Tensor s = ad::tanh(ad::slice(st_out, 1, 0, c - half));
    const ad::Tensor t = ad::slice(st_out, 1, c - half, 2 * (c - half));
    sample_ld.push_back(ad::batch_sum(s));
    const ad::Tensor out = ad::concat({ya, yb * ad::exp(s) + t}, 1);
    require_finite(out, "forward");
    if (observe)
        observe(index, "coupling_out", out);
    return out;
}

ad::Tensor FlowModel::step_inverse(const Step& st, std::size_t index, const std::vector<ad::Tensor>& bound,
                                   const ad::Tensor& y) const
{
    const std::size_t c = st.channels, half = c / 2;
    const ad::Tensor ya = ad::slice(y, 1, 0, half);
    const ad::Tensor yb = ad::slice(y, 1, half, c);
    const ad::Tensor hidden = ad::relu(ad::conv2d(ya, bound[st.w1], bound[st.b1]));
    const ad::Tensor st_out = ad::conv2d(hidden, bound[st.w2], bound[st.b2]);
    const ad::Tensor s = ad::tanh(ad::slice(st_out, 1, 0, c - half));
    const ad::Tensor t = ad::slice(st_out, 1, c - half, 2 * (c - half));
    ad::Tensor x = ad::concat({ya, (yb - t) * ad::exp(ad::scale(s, -1.0))}, 1);
    x = ad::permute_channels(x, inverse_permutation(perms_[index]));
    x = ad::actnorm_inverse(x, bound[st.an_bias], bound[st.an_scale]);
    require_finite(x, "inverse");
    return x;
}

FlowModel::Encoded FlowModel::forward(ad::Tape& tape, const std::vector<ad::Tensor>& bound, const ad::Tensor& x,
                                      ad::ParameterSet* init, const Observer& observe) const
{
    if (bound.size() != params_.size())
        throw DimensionError("flow: expected " + std::to_string(params_.size()) + " bound parameters");
    if (x.shape().size() != 4 || x.dim(1) != cfg_.channels || x.dim(2) != cfg_.height || x.dim(3) != cfg_.width)
        throw DimensionError("flow: input shape " + ad::to_string(x.shape()) + " does not match config");
    const std::size_t n = x.dim(0);
    std::vector<ad::Tensor> sample_ld, shared_ld, pieces;
    ad::Tensor h = x;
    std::size_t index = 0;
    for (std::size_t l = 0; l < levels_.size(); ++l) {
        h = ad::squeeze2x(h);
        for (const Step& st : levels_[l])
            h = step_forward(st, index++, tape, bound, h, sample_ld, shared_ld, init, observe);
        if (l + 1 < levels_.size()) {
            const std::size_t c = h.dim(1);
            const ad::Tensor out = ad::slice(h, 1, c / 2, c);
            pieces.push_back(ad::reshape(out, {n, out.numel() / n}));
            h = ad::slice(h, 1, 0, c / 2);
        }
    }
    pieces.push_back(ad::reshape(h, {n, h.numel() / n}));
    const ad::Tensor z = pieces.size() == 1 ? pieces[0] : ad::concat(pieces, 1);
    const ad::Tensor logdet = ad::add_n(sample_ld) + ad::expand_scalar(ad::add_n(shared_ld), {n});
    return {z, logdet};
}

ad::Tensor FlowModel::inverse(ad::Tape& tape, const std::vector<ad::Tensor>& bound, const ad::Tensor& z) const
{
    (void)tape;
    if (bound.size() != params_.size())
        throw DimensionError("flow: expected " + std::to_string(params_.size()) + " bound parameters");
    if (z.shape().size() != 2 || z.dim(1) != latent_size())
        throw DimensionError("flow: latent shape " + ad::to_string(z.shape()) + " does not match k = " +
                             std::to_string(latent_size()));
    const std::size_t n = z.dim(0);
    // Shapes of the split-off pieces, in latent order.
    std::vector<ad::Shape> shapes;
    std::size_t h = cfg_.height, w = cfg_.width;
    for (std::size_t l = 0; l < levels_.size(); ++l) {
        h /= 2;
        w /= 2;
        const std::size_t c = levels_[l].front().channels;
        shapes.push_back({n, l + 1 < levels_.size() ? c / 2 : c, h, w});
    }
    std::vector<std::size_t> offsets(shapes.size() + 1, 0);
    for (std::size_t i = 0; i < shapes.size(); ++i)
        offsets[i + 1] = offsets[i] + ad::numel(shapes[i]) / n;

    auto piece = [&](std::size_t i) { return ad::reshape(ad::slice(z, 1, offsets[i], offsets[i + 1]), shapes[i]); };
    ad::Tensor x = piece(shapes.size() - 1);
    std::size_t index = step_count();
    for (std::size_t l = levels_.size(); l-- > 0;) {
        if (l + 1 < levels_.size())
            x = ad::concat({x, piece(l)}, 1);
        for (std::size_t k = levels_[l].size(); k-- > 0;)
            x = step_inverse(levels_[l][k], --index, bound, x);
        x = ad::unsqueeze2x(x);
    }
    return x;
}

std::vector<double> FlowModel::encode(const RealImage& x, double* logdet) const
{
    if (cfg_.channels != 1)
        throw DimensionError("flow: single-image helpers need a one-channel model");
    ad::Tape tape;
    const auto bound = ad::bind(tape, params_, false);
    const Encoded e = forward(tape, bound, tape.constant({1, 1, x.height(), x.width()}, x.storage()));
    if (logdet)
        *logdet = e.logdet.data()[0];
    return {e.z.data().begin(), e.z.data().end()};
}

RealImage FlowModel::decode(std::span<const double> z) const
{
    if (cfg_.channels != 1)
        throw DimensionError("flow: single-image helpers need a one-channel model");
    ad::Tape tape;
    const auto bound = ad::bind(tape, params_, false);
    const ad::Tensor x = inverse(tape, bound, tape.constant({1, latent_size()}, {z.begin(), z.end()}));
    return RealImage(cfg_.height, cfg_.width, {x.data().begin(), x.data().end()});
}

namespace {

std::vector<double> stack(const std::vector<RealImage>& images, const std::vector<std::size_t>& order,
                          std::size_t begin, std::size_t end, Rng* dequant)
{
    std::vector<double> out;
    for (std::size_t i = begin; i < end; ++i)
        for (double v : images[order[i]].values())
            out.push_back(dequant ? v + dequant->uniform(0.0, 1.0 / 256.0) : v);
    return out;
}

void check_dataset(const FlowConfig& cfg, const std::vector<RealImage>& images, std::size_t min_count)
{
    if (images.size() < min_count)
        throw ConfigError("flow: dataset needs at least " + std::to_string(min_count) + " images");
    if (cfg.channels != 1)
        throw ConfigError("flow: image datasets are single-channel");
    for (const RealImage& img : images)
        if (img.height() != cfg.height || img.width() != cfg.width)
            throw DimensionError("flow: dataset image is " + std::to_string(img.height()) + "x" +
                                 std::to_string(img.width()) + ", model expects " + std::to_string(cfg.height) +
                                 "x" + std::to_string(cfg.width));
}

double nll_constant(std::size_t k)
{
    const double kd = static_cast<double>(k);
    return 0.5 * kd * std::log(2.0 * std::numbers::pi) + kd * std::log(256.0);
}

// Mean per-image NLL of a batch as a scalar tensor.
ad::Tensor batch_nll(const FlowModel& model, ad::Tape& tape, const std::vector<ad::Tensor>& bound,
                     std::vector<double> values, std::size_t n)
{
    const FlowConfig& cfg = model.config();
    const ad::Tensor x = tape.constant({n, cfg.channels, cfg.height, cfg.width}, std::move(values));
    const FlowModel::Encoded e = model.forward(tape, bound, x);
    const ad::Tensor per_image = ad::scale(ad::batch_sum(ad::square(e.z)), 0.5) - e.logdet;
    return ad::add_scalar(ad::mean(per_image), nll_constant(model.latent_size()));
}

} // namespace

void initialize_actnorm(FlowModel& model, const std::vector<RealImage>& batch)
{
    check_dataset(model.config(), batch, 1);
    std::vector<std::size_t> order(batch.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const FlowConfig& cfg = model.config();
    ad::Tape tape;
    const auto bound = ad::bind(tape, model.parameters(), false);
    ad::ParameterSet fitted = model.parameters();
    model.forward(tape, bound,
                  tape.constant({batch.size(), 1, cfg.height, cfg.width}, stack(batch, order, 0, batch.size(), nullptr)),
                  &fitted);
    model.parameters() = fitted;
    model.mark_initialized();
}

FlowTrainResult train_flow(FlowModel& model, const std::vector<RealImage>& dataset)
{
    const auto start = std::chrono::steady_clock::now();
    const FlowConfig& cfg = model.config();
    validate(cfg);
    check_dataset(cfg, dataset, 2);
    Rng rng(split_seed(cfg.seed, Stream::Data));
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t batch = std::min(cfg.batch_size, dataset.size());

    FlowTrainResult result;
    ad::Adam adam({cfg.lr});
    std::size_t iteration = 0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.below(i)]);
        if (!model.initialized()) {
            std::vector<RealImage> first;
            for (std::size_t i = 0; i < batch; ++i) {
                RealImage img = dataset[order[i]];
                for (double& v : img.values())
                    v += rng.uniform(0.0, 1.0 / 256.0);
                first.push_back(std::move(img));
            }
            initialize_actnorm(model, first);
        }
        double total = 0.0;
        std::size_t batches = 0;
        for (std::size_t b = 0; b + batch <= order.size(); b += batch) {
            ad::Tape tape;
            const auto bound = ad::bind(tape, model.parameters());
            ad::Tensor loss;
            try {
                loss = batch_nll(model, tape, bound, stack(dataset, order, b, b + batch, &rng), batch);
            } catch (const NumericError& e) {
                throw DivergenceError(e.what(), result.nll_trace);
            }
            const double value = loss.item();
            if (!std::isfinite(value)) {
                result.nll_trace.push_back(value);
                throw DivergenceError("flow training diverged at iteration " + std::to_string(iteration),
                                      result.nll_trace);
            }
            total += value;
            ++batches;
            try {
                tape.backward(loss);
            } catch (const NumericError& e) {
                throw DivergenceError(e.what(), result.nll_trace);
            }
            const double ramp = cfg.warmup ? std::min(1.0, static_cast<double>(iteration + 1) / static_cast<double>(cfg.warmup)) : 1.0;
            adam.step(model.parameters(), ad::gradients(bound), cfg.lr * ramp);
            ++iteration;
        }
        result.nll_trace.push_back(total / static_cast<double>(batches));
    }
    result.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

double flow_nll(const FlowModel& model, const std::vector<RealImage>& images)
{
    check_dataset(model.config(), images, 1);
    std::vector<std::size_t> order(images.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    ad::Tape tape;
    const auto bound = ad::bind(tape, model.parameters(), false);
    return batch_nll(model, tape, bound, stack(images, order, 0, images.size(), nullptr), images.size()).item();
}

RealImage flow_sample(const FlowModel& model, double temperature, std::uint64_t seed)
{
    Rng rng(split_seed(seed, Stream::Sample));
    std::vector<double> z(model.latent_size());
    for (double& v : z)
        v = temperature * rng.normal();
    return model.decode(z);
}

namespace {

std::string join(const std::vector<std::size_t>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
        s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

} // namespace

void save_flow(const fs::path& dir, const FlowModel& model)
{
    const FlowConfig& cfg = model.config();
    KeyValue topo;
    topo.set("format", std::string("ptych-flow-1"));
    topo.set("levels", static_cast<std::uint64_t>(cfg.levels));
    topo.set("steps", static_cast<std::uint64_t>(cfg.steps));
    topo.set("height", static_cast<std::uint64_t>(cfg.height));
    topo.set("width", static_cast<std::uint64_t>(cfg.width));
    topo.set("channels", static_cast<std::uint64_t>(cfg.channels));
    topo.set("hidden", static_cast<std::uint64_t>(cfg.hidden));
    topo.set("seed", static_cast<std::uint64_t>(cfg.seed));
    topo.set("level_channels", join(model.level_channels()));
    topo.set("initialized", model.initialized());
    for (std::size_t s = 0; s < model.step_count(); ++s)
        topo.set("permutation." + std::to_string(s), join(model.permutation(s)));
    KeyValue extra;
    extra.set("model", std::string("flow"));
    ad::save_parameters(dir, model.parameters(), extra);
    write_text_atomic(dir / "topology.txt", topo.serialize());
}

FlowModel load_flow(const fs::path& dir)
{
    const fs::path topo_path = dir / "topology.txt";
    if (!fs::exists(topo_path))
        throw MissingModelError("no flow model at " + dir.string());
    const KeyValue topo = KeyValue::load(topo_path);
    if (topo.get_string("format", "") != "ptych-flow-1")
        throw IoError(topo_path.string() + ": not a flow topology file");
    FlowConfig cfg;
    cfg.levels = topo.get_u64("levels");
    cfg.steps = topo.get_u64("steps");
    cfg.height = topo.get_u64("height");
    cfg.width = topo.get_u64("width");
    cfg.channels = topo.get_u64("channels");
    cfg.hidden = topo.get_u64("hidden");
    cfg.seed = topo.get_u64("seed");
    FlowModel model(cfg);
    const ad::ParameterSet loaded = ad::load_parameters(dir);
    if (loaded.size() != model.parameters().size())
        throw IoError(dir.string() + ": parameter count does not match topology");
    for (std::size_t i = 0; i < loaded.size(); ++i) {
        if (loaded[i].name != model.parameters()[i].name || loaded[i].shape != model.parameters()[i].shape)
            throw IoError(dir.string() + ": parameter " + loaded[i].name + " does not match topology");
        model.parameters()[i].value = loaded[i].value;
    }
    for (std::size_t s = 0; s < model.step_count(); ++s) {
        std::vector<std::size_t> stored;
        for (std::uint64_t v : topo.get_u64s("permutation." + std::to_string(s), {}))
            stored.push_back(static_cast<std::size_t>(v));
        if (stored != model.permutation(s))
            throw IoError(dir.string() + ": permutation table " + std::to_string(s) + " does not match seed");
    }
    if (topo.get_bool("initialized", false))
        model.mark_initialized();
    return model;
}

} // namespace ptych
