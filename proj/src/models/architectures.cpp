#include <cmath>

#include "venomguard/common/rng.hpp"
#include "venomguard/models/models.hpp"

namespace vg::models {

namespace {

using nn::Var;

// Generator and critic trunks are written once against a context interface
// and instantiated twice: ShapeCtx enumerates parameter shapes for seeded
// init, RunCtx consumes parameters and builds the graph. Keeping a single
// body definition makes the two walks impossible to desynchronize.

struct ShapeCtx {
    struct T {
        int n, c, h, w;
    };
    std::vector<std::vector<int>> shapes;

    T conv(T x, int co, int k, int s, int p) {
        shapes.push_back({co, x.c, k, k});
        shapes.push_back({co});
        return {x.n, co, (x.h + 2 * p - k) / s + 1, (x.w + 2 * p - k) / s + 1};
    }
    T dense(T x, int out) {
        shapes.push_back({out, x.c});
        shapes.push_back({out});
        return {x.n, out, 1, 1};
    }
    T relu(T x) { return x; }
    T lrelu(T x) { return x; }
    T up2(T x) { return {x.n, x.c, 2 * x.h, 2 * x.w}; }
    T cat(T a, T b) { return {a.n, a.c + b.c, a.h, a.w}; }
    T res_add(T a, T) { return a; }
    T flatten(T x) { return {x.n, x.c * x.h * x.w, 1, 1}; }
    T tanh(T x) { return x; }
    T sigmoid(T x) { return x; }
};

struct RunCtx {
    using T = Var;
    std::span<const Var> params;
    std::size_t i = 0;

    Var take() {
        if (i >= params.size()) throw ShapeError("architecture: parameter underrun");
        return params[i++];
    }
    T conv(T x, int, int k, int s, int p) {
        Var w = take(), b = take();
        return nn::conv2d(x, w, b, {k, s, p});
    }
    T dense(T x, int) {
        Var w = take(), b = take();
        return nn::linear(x, w, b);
    }
    T relu(T x) { return nn::relu(x); }
    T lrelu(T x) { return nn::leaky_relu(x, 0.2); }
    T up2(T x) { return nn::upsample2(x); }
    T cat(T a, T b) { return nn::concat_c(a, b); }
    T res_add(T a, T b) { return nn::add(a, b); }
    T flatten(T x) {
        const auto& d = x->value.dims();
        return nn::reshape(x, {d[0], d[1] * d[2] * d[3]});
    }
    T tanh(T x) { return nn::tanh_op(x); }
    T sigmoid(T x) { return nn::sigmoid_op(x); }
};

int res_blocks_of(ArchName a) {
    switch (a) {
        case ArchName::Res6: return 6;
        case ArchName::Res9: return 9;
        default: return 0;
    }
}

int unet_depth_of(ArchName a) { return a == ArchName::UNet256 ? 4 : 3; }

// Trunk ending in a linear conv head; the caller applies the output squash.
template <class Cx, class T = typename Cx::T>
T generator_body(Cx& cx, T x, ArchName name, int base, int out_ch) {
    if (name == ArchName::CNet) {
        T h = cx.relu(cx.conv(x, base, 3, 1, 1));
        h = cx.relu(cx.conv(h, 2 * base, 3, 1, 1));
        h = cx.relu(cx.conv(h, 2 * base, 3, 1, 1));
        h = cx.relu(cx.conv(h, 2 * base, 3, 1, 1));
        h = cx.relu(cx.conv(h, base, 3, 1, 1));
        return cx.conv(h, out_ch, 3, 1, 1);
    }
    if (name == ArchName::Res6 || name == ArchName::Res9) {
        T h = cx.relu(cx.conv(x, base, 3, 1, 1));
        h = cx.relu(cx.conv(h, 2 * base, 3, 2, 1));
        h = cx.relu(cx.conv(h, 4 * base, 3, 2, 1));
        const int blocks = res_blocks_of(name);
        for (int b = 0; b < blocks; ++b) {
            T r = cx.relu(cx.conv(h, 4 * base, 3, 1, 1));
            r = cx.conv(r, 4 * base, 3, 1, 1);
            h = cx.res_add(h, r);
        }
        h = cx.relu(cx.conv(cx.up2(h), 2 * base, 3, 1, 1));
        h = cx.relu(cx.conv(cx.up2(h), base, 3, 1, 1));
        return cx.conv(h, out_ch, 3, 1, 1);
    }
    // UNet: multi-scale skip connections, depth 3 (UNet128) or 4 (UNet256).
    const int depth = unet_depth_of(name);
    const int widths[5] = {base, 2 * base, 4 * base, 4 * base, 4 * base};
    std::vector<T> skips;
    T h = cx.relu(cx.conv(x, widths[0], 3, 1, 1));
    skips.push_back(h);
    for (int d = 1; d <= depth; ++d) {
        h = cx.relu(cx.conv(h, widths[d], 3, 2, 1));
        if (d < depth) skips.push_back(h);
    }
    h = cx.relu(cx.conv(h, widths[depth], 3, 1, 1));
    for (int d = depth - 1; d >= 0; --d) {
        h = cx.cat(cx.up2(h), skips[static_cast<std::size_t>(d)]);
        h = cx.relu(cx.conv(h, widths[d], 3, 1, 1));
    }
    return cx.conv(h, out_ch, 3, 1, 1);
}

// 7 convolutional layers appended with one dense layer; the dense head emits
// realness (first column) and, for D_A, K domain logits after it.
template <class Cx, class T = typename Cx::T>
T critic_body(Cx& cx, T x, int base, int head_out) {
    T h = cx.lrelu(cx.conv(x, base, 3, 1, 1));
    h = cx.lrelu(cx.conv(h, 2 * base, 3, 2, 1));
    h = cx.lrelu(cx.conv(h, 2 * base, 3, 1, 1));
    h = cx.lrelu(cx.conv(h, 4 * base, 3, 2, 1));
    h = cx.lrelu(cx.conv(h, 4 * base, 3, 1, 1));
    h = cx.lrelu(cx.conv(h, 8 * base, 3, 2, 1));
    h = cx.lrelu(cx.conv(h, 8 * base, 3, 1, 1));
    return cx.dense(cx.flatten(h), head_out);
}

int input_channels(const ModelHandle& m) {
    if (is_critic_role(m.role)) return m.opts.in_channels;
    switch (m.arch.conditioning) {
        case Conditioning::AttributeBroadcast: return m.opts.in_channels + m.opts.attr_count;
        default: return m.opts.in_channels;
    }
}

std::vector<std::vector<int>> collect_shapes(const ModelHandle& m) {
    ShapeCtx cx;
    ShapeCtx::T x{1, input_channels(m), m.opts.resolution, m.opts.resolution};
    if (is_critic_role(m.role)) {
        const int head = m.role == Role::DA ? 1 + m.opts.attr_count : 1;
        critic_body(cx, x, m.opts.critic_width, head);
    } else {
        generator_body(cx, x, m.arch.name, m.opts.base_width, m.opts.out_channels);
    }
    return cx.shapes;
}

}  // namespace

std::string to_string(ArchName a) {
    switch (a) {
        case ArchName::CNet: return "CNet";
        case ArchName::Res6: return "Res6";
        case ArchName::Res9: return "Res9";
        case ArchName::UNet128: return "UNet128";
        case ArchName::UNet256: return "UNet256";
    }
    return "?";
}

std::string to_string(Conditioning c) {
    switch (c) {
        case Conditioning::AttributeBroadcast: return "attribute-broadcast";
        case Conditioning::LandmarkConcat: return "landmark-concat";
        case Conditioning::None: return "none";
    }
    return "?";
}

std::string to_string(Role r) {
    switch (r) {
        case Role::SM: return "SM";
        case Role::PG: return "PG";
        case Role::DA: return "D_A";
        case Role::DB: return "D_B";
        case Role::TM: return "TM";
        case Role::M: return "M";
        case Role::MInfected: return "M_infected";
    }
    return "?";
}

ArchName arch_from_string(const std::string& s) {
    if (s == "CNet") return ArchName::CNet;
    if (s == "Res6") return ArchName::Res6;
    if (s == "Res9") return ArchName::Res9;
    if (s == "UNet128") return ArchName::UNet128;
    if (s == "UNet256") return ArchName::UNet256;
    throw ConfigError("unknown architecture tag: " + s);
}

Conditioning conditioning_from_string(const std::string& s) {
    if (s == "attribute-broadcast") return Conditioning::AttributeBroadcast;
    if (s == "landmark-concat") return Conditioning::LandmarkConcat;
    if (s == "none") return Conditioning::None;
    throw ConfigError("unknown conditioning: " + s);
}

Role role_from_string(const std::string& s) {
    if (s == "SM") return Role::SM;
    if (s == "PG") return Role::PG;
    if (s == "D_A") return Role::DA;
    if (s == "D_B") return Role::DB;
    if (s == "TM") return Role::TM;
    if (s == "M") return Role::M;
    if (s == "M_infected") return Role::MInfected;
    throw ConfigError("unknown role: " + s);
}

bool is_generator_role(Role r) {
    return r == Role::SM || r == Role::PG || r == Role::TM || r == Role::M ||
           r == Role::MInfected;
}

bool is_critic_role(Role r) { return r == Role::DA || r == Role::DB; }

std::size_t ModelHandle::param_count() const {
    std::size_t n = 0;
    for (const auto& p : params) n += p->value.size();
    return n;
}

int ModelHandle::residual_blocks() const { return res_blocks_of(arch.name); }

std::vector<double> ModelHandle::flat_parameters() const {
    std::vector<double> flat;
    flat.reserve(param_count());
    for (const auto& p : params)
        flat.insert(flat.end(), p->value.data(), p->value.data() + p->value.size());
    return flat;
}

void ModelHandle::load_flat_parameters(const std::vector<double>& flat) {
    if (flat.size() != param_count()) throw ConfigError("load_flat_parameters: size mismatch");
    std::size_t off = 0;
    for (auto& p : params) {
        std::copy(flat.begin() + off, flat.begin() + off + p->value.size(), p->value.data());
        off += p->value.size();
    }
}

ModelHandle build(ArchitectureTag tag, Role role, std::uint64_t seed, BuildOptions opts) {
    if (opts.resolution < 8) throw ConfigError("build: resolution must be >= 8");
    if (is_generator_role(role)) {
        const int depth =
            (tag.name == ArchName::UNet128 || tag.name == ArchName::UNet256)
                ? unet_depth_of(tag.name)
                : 2;
        if (opts.resolution % (1 << depth) != 0)
            throw ConfigError("build: resolution incompatible with " + to_string(tag.name));
    }

    ModelHandle m;
    m.arch = tag;
    m.role = role;
    m.opts = opts;
    m.seed = seed;

    Rng rng(Rng::mix(seed, 0x6d6f64656cULL));
    for (const auto& shape : collect_shapes(m)) {
        nn::Tensor t = nn::Tensor::zeros(shape);
        if (shape.size() > 1) {
            std::size_t fan_in = 1;
            for (std::size_t i = 1; i < shape.size(); ++i)
                fan_in *= static_cast<std::size_t>(shape[i]);
            const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
            double* d = t.data();
            for (std::size_t i = 0; i < t.size(); ++i) d[i] = stddev * rng.normal();
        }
        m.params.push_back(nn::leaf(std::move(t)));
    }
    return m;
}

nn::Var label_channels(const nn::Tensor& labels, int h, int w) {
    const auto& d = labels.dims();
    if (d.size() != 2) throw ShapeError("label_channels: [N,K] required");
    const int n = d[0], k = d[1];
    nn::Tensor t = nn::Tensor::zeros({n, k, h, w});
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) {
            double* dst = t.data() + (static_cast<std::size_t>(i) * k + j) * plane;
            const double v = labels.data()[static_cast<std::size_t>(i) * k + j];
            for (std::size_t q = 0; q < plane; ++q) dst[q] = v;
        }
    return nn::constant(std::move(t));
}

nn::Tensor labels_tensor(const std::vector<dataio::DomainLabel>& labels) {
    if (labels.empty()) throw ConfigError("labels_tensor: empty");
    const int n = static_cast<int>(labels.size());
    const int k = static_cast<int>(labels[0].k());
    nn::Tensor t = nn::Tensor::zeros({n, k});
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(labels[static_cast<std::size_t>(i)].k()) != k)
            throw ShapeError("labels_tensor: inconsistent label length");
        for (int j = 0; j < k; ++j)
            t.data()[static_cast<std::size_t>(i) * k + j] =
                labels[static_cast<std::size_t>(i)].bits[static_cast<std::size_t>(j)];
    }
    return t;
}

namespace {

nn::Var run_generator(const ModelHandle& m, std::span<const nn::Var> params, const nn::Var& in) {
    RunCtx cx{params};
    nn::Var head = generator_body(cx, in, m.arch.name, m.opts.base_width, m.opts.out_channels);
    if (cx.i != params.size()) throw ShapeError("generator: parameter overrun");
    return m.role == Role::PG ? nn::tanh_op(head) : nn::sigmoid_op(head);
}

void check_image_input(const ModelHandle& m, const nn::Var& x, int expect_c) {
    const auto& d = x->value.dims();
    if (d.size() != 4 || d[1] != expect_c || d[2] != m.opts.resolution ||
        d[3] != m.opts.resolution)
        throw ShapeError("forward: input shape " + nn::Tensor::shape_str(d) +
                         " incompatible with model (want C=" + std::to_string(expect_c) +
                         ", HW=" + std::to_string(m.opts.resolution) + ")");
}

}  // namespace

nn::Var editor_forward(const ModelHandle& m, const nn::Var& x, const nn::Tensor& labels) {
    if (!(m.role == Role::SM || m.role == Role::M || m.role == Role::TM ||
          m.role == Role::MInfected))
        throw ConfigError("editor_forward: role must be an editor");
    if (m.arch.conditioning != Conditioning::AttributeBroadcast)
        throw ConfigError("editor_forward: attribute-broadcast conditioning required");
    check_image_input(m, x, m.opts.in_channels);
    if (labels.dims() != std::vector<int>{x->value.dim(0), m.opts.attr_count})
        throw ShapeError("editor_forward: label shape mismatch");
    nn::Var in = nn::concat_c(x, label_channels(labels, m.opts.resolution, m.opts.resolution));
    return run_generator(m, m.params, in);
}

nn::Var translator_forward(const ModelHandle& m, const nn::Var& z) {
    return translator_forward_with(m, m.params, z);
}

nn::Var translator_forward_with(const ModelHandle& m, std::span<const nn::Var> params,
                                const nn::Var& z) {
    if (m.arch.conditioning != Conditioning::LandmarkConcat)
        throw ConfigError("translator_forward: landmark-concat conditioning required");
    if (z->value.dims().size() != 4 || z->value.dim(1) != 1)
        throw ShapeError("translator_forward: 1-channel landmark map required");
    check_image_input(m, z, 1);
    return run_generator(m, params, z);
}

nn::Var pg_forward(const ModelHandle& m, const nn::Var& x) {
    if (m.role != Role::PG) throw ConfigError("pg_forward: role must be PG");
    check_image_input(m, x, m.opts.in_channels);
    return run_generator(m, m.params, x);
}

CriticOutput critic_forward(const ModelHandle& d, const nn::Var& img) {
    if (!is_critic_role(d.role)) throw ConfigError("critic_forward: critic role required");
    check_image_input(d, img, d.opts.in_channels);
    RunCtx cx{d.params};
    const int head = d.role == Role::DA ? 1 + d.opts.attr_count : 1;
    nn::Var out = critic_body(cx, nn::Var(img), d.opts.critic_width, head);
    if (cx.i != d.params.size()) throw ShapeError("critic: parameter overrun");
    CriticOutput co;
    const int n = out->value.dim(0);
    if (d.role == Role::DA) {
        nn::Var wide = nn::reshape(out, {n, head, 1, 1});
        co.realness = nn::reshape(nn::slice_c(wide, 0, 1), {n, 1});
        co.domain_logits = nn::reshape(nn::slice_c(wide, 1, head), {n, head - 1});
    } else {
        co.realness = out;
    }
    return co;
}

nn::Var perturb_batch(const ModelHandle& pg, const nn::Var& x, double eps) {
    if (eps < 0.0 || eps > 0.1) throw ConfigError("perturb: eps must be in [0, 0.1]");
    if (eps == 0.0) return x;
    nn::Var delta = pg_forward(pg, x);
    nn::Var d = nn::clamp_op(nn::scale(delta, eps), -eps, eps);
    nn::Var xp = nn::clamp_op(nn::add(x, d), 0.0, 1.0);
    // Exact sup-norm contract: floating-point addition can overshoot by one
    // ulp; nudge offending values back toward x. This edits values only and
    // leaves the recorded graph intact.
    {
        const double* xs = x->value.data();
        double* ps = xp->value.data();
        for (std::size_t i = 0; i < xp->value.size(); ++i) {
            double diff = ps[i] - xs[i];
            if (diff > eps) {
                ps[i] = xs[i] + eps;
                while (ps[i] - xs[i] > eps) ps[i] = std::nextafter(ps[i], xs[i]);
            } else if (diff < -eps) {
                ps[i] = xs[i] - eps;
                while (ps[i] - xs[i] < -eps) ps[i] = std::nextafter(ps[i], xs[i]);
            }
        }
    }
    return xp;
}

dataio::ImageTensor perturb(const ModelHandle& pg, const dataio::ImageTensor& x, double eps) {
    nn::NoGradGuard ng;
    nn::Tensor xt = dataio::to_tensor(x);
    const auto& d = xt.dims();
    nn::Var xb = nn::constant(xt.reshaped({1, d[0], d[1], d[2]}));
    nn::Var xp = perturb_batch(pg, xb, eps);
    dataio::ImageTensor out = dataio::from_tensor(xp->value);
    // re-impose the budget in float storage (quantization can overshoot)
    const float feps = static_cast<float>(eps);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        const float xf = x.data[i];
        float& pf = out.data[i];
        if (static_cast<double>(pf) - xf > eps) {
            pf = xf + feps;
            while (static_cast<double>(pf) - xf > eps) pf = std::nextafterf(pf, xf);
        } else if (static_cast<double>(pf) - xf < -eps) {
            pf = xf - feps;
            while (static_cast<double>(pf) - xf < -eps) pf = std::nextafterf(pf, xf);
        }
    }
    return out;
}

dataio::ImageTensor forward_editor(const ModelHandle& m, const dataio::ImageTensor& x,
                                   const dataio::DomainLabel& c) {
    nn::NoGradGuard ng;
    if (static_cast<int>(c.k()) != m.opts.attr_count)
        throw ShapeError("forward_editor: label length mismatch");
    nn::Tensor xt = dataio::to_tensor(x);
    const auto& d = xt.dims();
    nn::Var xb = nn::constant(xt.reshaped({1, d[0], d[1], d[2]}));
    nn::Var y = editor_forward(m, xb, labels_tensor({c}));
    return dataio::from_tensor(y->value);
}

dataio::ImageTensor forward_translator(const ModelHandle& m, const dataio::ImageTensor& z) {
    nn::NoGradGuard ng;
    nn::Tensor zt = dataio::to_tensor(z);
    const auto& d = zt.dims();
    nn::Var zb = nn::constant(zt.reshaped({1, d[0], d[1], d[2]}));
    nn::Var y = translator_forward(m, zb);
    return dataio::from_tensor(y->value);
}

void copy_parameters(const ModelHandle& src, ModelHandle& dst) {
    if (src.arch.name != dst.arch.name || src.arch.conditioning != dst.arch.conditioning)
        throw ConfigError("copy_parameters: architecture tags differ");
    if (src.params.size() != dst.params.size())
        throw ConfigError("copy_parameters: parameter layout differs");
    for (std::size_t i = 0; i < src.params.size(); ++i) {
        if (!src.params[i]->value.same_shape(dst.params[i]->value))
            throw ConfigError("copy_parameters: parameter shape differs");
        std::copy(src.params[i]->value.data(),
                  src.params[i]->value.data() + src.params[i]->value.size(),
                  dst.params[i]->value.data());
    }
    dst.train_step = src.train_step;
}

}  // namespace vg::models
