#include "pidcnn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

namespace pidcnn {
namespace {

struct Dims5 {
  std::size_t n, c, t, h, w;
  std::size_t plane() const { return h * w; }
};

Dims5 dims5(const Shape& s, const char* op) {
  if (s.size() != 5) throw ShapeError(std::string(op) + ": expected [N,C,T,H,W], got " + to_string(s));
  return {s[0], s[1], s[2], s[3], s[4]};
}

// Product of extents after axis 1.
std::size_t inner_extent(const Shape& s) {
  std::size_t n = 1;
  for (std::size_t i = 2; i < s.size(); ++i) n *= s[i];
  return n;
}

template <typename S>
void conv_forward(const Dims5& d, std::size_t cout, const S* x, const S* w, const S* b, S* out) {
  const std::size_t plane = d.plane();
  const auto H = static_cast<std::ptrdiff_t>(d.h);
  const auto W = static_cast<std::ptrdiff_t>(d.w);
  for (std::size_t n = 0; n < d.n; ++n) {
    for (std::size_t t = 0; t < d.t; ++t) {
      for (std::size_t co = 0; co < cout; ++co) {
        S* o = out + ((n * cout + co) * d.t + t) * plane;
        std::fill(o, o + plane, b[co]);
        for (std::size_t ci = 0; ci < d.c; ++ci) {
          const S* in = x + ((n * d.c + ci) * d.t + t) * plane;
          const S* k = w + (co * d.c + ci) * 9;
          for (std::ptrdiff_t ky = 0; ky < 3; ++ky) {
            const std::ptrdiff_t dy = ky - 1;
            const std::ptrdiff_t y0 = std::max<std::ptrdiff_t>(0, -dy), y1 = std::min(H, H - dy);
            for (std::ptrdiff_t kx = 0; kx < 3; ++kx) {
              const std::ptrdiff_t dx = kx - 1;
              const std::ptrdiff_t x0 = std::max<std::ptrdiff_t>(0, -dx), x1 = std::min(W, W - dx);
              const S wv = k[ky * 3 + kx];
              for (std::ptrdiff_t y = y0; y < y1; ++y) {
                S* orow = o + y * W;
                const S* irow = in + (y + dy) * W + dx;
                for (std::ptrdiff_t xx = x0; xx < x1; ++xx) orow[xx] += wv * irow[xx];
              }
            }
          }
        }
      }
    }
  }
}

template <typename S>
void conv_backward_input(const Dims5& d, std::size_t cout, const S* g, const S* w, S* gx) {
  const std::size_t plane = d.plane();
  const auto H = static_cast<std::ptrdiff_t>(d.h);
  const auto W = static_cast<std::ptrdiff_t>(d.w);
  for (std::size_t n = 0; n < d.n; ++n) {
    for (std::size_t t = 0; t < d.t; ++t) {
      for (std::size_t co = 0; co < cout; ++co) {
        const S* go = g + ((n * cout + co) * d.t + t) * plane;
        for (std::size_t ci = 0; ci < d.c; ++ci) {
          S* gi = gx + ((n * d.c + ci) * d.t + t) * plane;
          const S* k = w + (co * d.c + ci) * 9;
          for (std::ptrdiff_t ky = 0; ky < 3; ++ky) {
            const std::ptrdiff_t dy = ky - 1;
            const std::ptrdiff_t y0 = std::max<std::ptrdiff_t>(0, -dy), y1 = std::min(H, H - dy);
            for (std::ptrdiff_t kx = 0; kx < 3; ++kx) {
              const std::ptrdiff_t dx = kx - 1;
              const std::ptrdiff_t x0 = std::max<std::ptrdiff_t>(0, -dx), x1 = std::min(W, W - dx);
              const S wv = k[ky * 3 + kx];
              for (std::ptrdiff_t y = y0; y < y1; ++y) {
                const S* grow = go + y * W;
                S* irow = gi + (y + dy) * W + dx;
                for (std::ptrdiff_t xx = x0; xx < x1; ++xx) irow[xx] += wv * grow[xx];
              }
            }
          }
        }
      }
    }
  }
}

template <typename S>
void conv_backward_params(const Dims5& d, std::size_t cout, const S* g, const S* x, S* gw, S* gb) {
  const std::size_t plane = d.plane();
  const auto H = static_cast<std::ptrdiff_t>(d.h);
  const auto W = static_cast<std::ptrdiff_t>(d.w);
  std::vector<double> acc_w(cout * d.c * 9, 0.0);
  std::vector<double> acc_b(cout, 0.0);
  for (std::size_t n = 0; n < d.n; ++n) {
    for (std::size_t t = 0; t < d.t; ++t) {
      for (std::size_t co = 0; co < cout; ++co) {
        const S* go = g + ((n * cout + co) * d.t + t) * plane;
        if (gb) {
          double s = 0.0;
          for (std::size_t i = 0; i < plane; ++i) s += go[i];
          acc_b[co] += s;
        }
        if (!gw) continue;
        for (std::size_t ci = 0; ci < d.c; ++ci) {
          const S* in = x + ((n * d.c + ci) * d.t + t) * plane;
          double* k = acc_w.data() + (co * d.c + ci) * 9;
          for (std::ptrdiff_t ky = 0; ky < 3; ++ky) {
            const std::ptrdiff_t dy = ky - 1;
            const std::ptrdiff_t y0 = std::max<std::ptrdiff_t>(0, -dy), y1 = std::min(H, H - dy);
            for (std::ptrdiff_t kx = 0; kx < 3; ++kx) {
              const std::ptrdiff_t dx = kx - 1;
              const std::ptrdiff_t x0 = std::max<std::ptrdiff_t>(0, -dx), x1 = std::min(W, W - dx);
              double s = 0.0;
              for (std::ptrdiff_t y = y0; y < y1; ++y) {
                const S* grow = go + y * W;
                const S* irow = in + (y + dy) * W + dx;
                S row = 0;
                for (std::ptrdiff_t xx = x0; xx < x1; ++xx) row += grow[xx] * irow[xx];
                s += row;
              }
              k[ky * 3 + kx] += s;
            }
          }
        }
      }
    }
  }
  if (gw) {
    for (std::size_t i = 0; i < acc_w.size(); ++i) gw[i] += static_cast<S>(acc_w[i]);
  }
  if (gb) {
    for (std::size_t i = 0; i < cout; ++i) gb[i] += static_cast<S>(acc_b[i]);
  }
}

template <typename S>
void require_vector(const TracedValue<S>& v, std::size_t len, const char* what) {
  if (v.shape() != Shape{len}) {
    throw ShapeError(std::string(what) + ": expected shape (" + std::to_string(len) + "), got " + to_string(v.shape()));
  }
}

}  // namespace

template <typename S>
TracedValue<S> conv_ct33(const TracedValue<S>& x, const TracedValue<S>& weight, const TracedValue<S>& bias) {
  const Dims5 d = dims5(x.shape(), "conv_ct33");
  const Shape& ws = weight.shape();
  if (ws.size() != 5 || ws[2] != 1 || ws[3] != 3 || ws[4] != 3) {
    throw ShapeError("conv_ct33: weight must be [Cout,Cin,1,3,3], got " + to_string(ws));
  }
  if (ws[1] != d.c) {
    throw ShapeError("conv_ct33: input " + to_string(x.shape()) + " has Cin=" + std::to_string(d.c) + " but weight " +
                     to_string(ws) + " expects Cin=" + std::to_string(ws[1]));
  }
  const std::size_t cout = ws[0];
  require_vector(bias, cout, "conv_ct33 bias");

  BasicTensor<S> out({d.n, cout, d.t, d.h, d.w});
  conv_forward(d, cout, x.value().data().data(), weight.value().data().data(), bias.value().data().data(),
               out.data().data());

  auto& tape = x.tape();
  const std::size_t xid = x.id(), wid = weight.id(), bid = bias.id();
  return tape.record(std::move(out), {xid, wid, bid}, [d, cout, xid, wid, bid](Tape<S>& tp, std::size_t self) {
    const S* g = tp.grad(self).data().data();
    if (tp.requires_grad(xid)) {
      conv_backward_input(d, cout, g, tp.value(wid).data().data(), tp.grad(xid).data().data());
    }
    S* gw = tp.requires_grad(wid) ? tp.grad(wid).data().data() : nullptr;
    S* gb = tp.requires_grad(bid) ? tp.grad(bid).data().data() : nullptr;
    if (gw || gb) conv_backward_params(d, cout, g, tp.value(xid).data().data(), gw, gb);
  });
}

template <typename S>
TracedValue<S> batch_norm(const TracedValue<S>& x, const TracedValue<S>& gamma, const TracedValue<S>& beta,
                          RunningStats<S>& stats, const BatchNormOptions& options) {
  const Dims5 d = dims5(x.shape(), "batch_norm");
  require_vector(gamma, d.c, "batch_norm gamma");
  require_vector(beta, d.c, "batch_norm beta");
  const std::size_t block = d.t * d.plane();
  const std::size_t count = d.n * block;
  const bool train = options.mode == Mode::train;

  if (train && count < 2) {
    throw ShapeError("batch_norm: train mode needs at least 2 values per channel, input " + to_string(x.shape()));
  }
  if (!train && (!stats.mean || !stats.var)) {
    throw std::logic_error(
        "batch_norm: eval mode without running statistics; initialise them explicitly "
        "(mean 0, var 1) or run a train-mode pass first");
  }
  if (stats.mean && (stats.mean->shape() != Shape{d.c} || !stats.var || stats.var->shape() != Shape{d.c})) {
    throw ShapeError("batch_norm: running statistics do not match channel count " + std::to_string(d.c));
  }

  const auto& xv = x.value();
  const auto& gv = gamma.value();
  const auto& bv = beta.value();
  std::vector<S> mean(d.c), inv_std(d.c);
  for (std::size_t c = 0; c < d.c; ++c) {
    if (train) {
      double s = 0.0;
      for (std::size_t n = 0; n < d.n; ++n) {
        const S* p = xv.data().data() + (n * d.c + c) * block;
        for (std::size_t i = 0; i < block; ++i) s += p[i];
      }
      const double mu = s / static_cast<double>(count);
      double ss = 0.0;
      for (std::size_t n = 0; n < d.n; ++n) {
        const S* p = xv.data().data() + (n * d.c + c) * block;
        for (std::size_t i = 0; i < block; ++i) {
          const double dv = p[i] - mu;
          ss += dv * dv;
        }
      }
      const double var = ss / static_cast<double>(count);
      mean[c] = static_cast<S>(mu);
      inv_std[c] = static_cast<S>(1.0 / std::sqrt(var + options.epsilon));
      if (!stats.mean) stats = RunningStats<S>::standard(d.c);
      const double unbiased = var * static_cast<double>(count) / static_cast<double>(count - 1);
      auto& rm = (*stats.mean)[c];
      auto& rv = (*stats.var)[c];
      rm = static_cast<S>(options.momentum * rm + (1.0 - options.momentum) * mu);
      rv = static_cast<S>(options.momentum * rv + (1.0 - options.momentum) * unbiased);
    } else {
      mean[c] = (*stats.mean)[c];
      inv_std[c] = static_cast<S>(1.0 / std::sqrt(static_cast<double>((*stats.var)[c]) + options.epsilon));
    }
  }

  BasicTensor<S> xhat(xv.shape());
  BasicTensor<S> out(xv.shape());
  for (std::size_t n = 0; n < d.n; ++n) {
    for (std::size_t c = 0; c < d.c; ++c) {
      const std::size_t base = (n * d.c + c) * block;
      for (std::size_t i = 0; i < block; ++i) {
        const S h = (xv[base + i] - mean[c]) * inv_std[c];
        xhat[base + i] = h;
        out[base + i] = gv[c] * h + bv[c];
      }
    }
  }

  auto& tape = x.tape();
  const std::size_t xid = x.id(), gid = gamma.id(), bid = beta.id();
  return tape.record(std::move(out), {xid, gid, bid},
                     [d, block, count, train, xid, gid, bid, xhat = std::move(xhat), inv_std = std::move(inv_std)](
                         Tape<S>& tp, std::size_t self) {
                       const auto& g = tp.grad(self);
                       const auto& gam = tp.value(gid);
                       const bool want_x = tp.requires_grad(xid);
                       S* gx = want_x ? tp.grad(xid).data().data() : nullptr;
                       S* gg = tp.requires_grad(gid) ? tp.grad(gid).data().data() : nullptr;
                       S* gb = tp.requires_grad(bid) ? tp.grad(bid).data().data() : nullptr;
                       const double m = static_cast<double>(count);
                       for (std::size_t c = 0; c < d.c; ++c) {
                         double sum_g = 0.0, sum_gh = 0.0;
                         for (std::size_t n = 0; n < d.n; ++n) {
                           const std::size_t base = (n * d.c + c) * block;
                           for (std::size_t i = 0; i < block; ++i) {
                             sum_g += g[base + i];
                             sum_gh += static_cast<double>(g[base + i]) * xhat[base + i];
                           }
                         }
                         if (gg) gg[c] += static_cast<S>(sum_gh);
                         if (gb) gb[c] += static_cast<S>(sum_g);
                         if (!gx) continue;
                         const S scale = gam[c] * inv_std[c];
                         const S mean_g = static_cast<S>(sum_g / m);
                         const S mean_gh = static_cast<S>(sum_gh / m);
                         for (std::size_t n = 0; n < d.n; ++n) {
                           const std::size_t base = (n * d.c + c) * block;
                           for (std::size_t i = 0; i < block; ++i) {
                             gx[base + i] += train ? scale * (g[base + i] - mean_g - xhat[base + i] * mean_gh)
                                                   : scale * g[base + i];
                           }
                         }
                       }
                     });
}

template <typename S>
TracedValue<S> prelu(const TracedValue<S>& x, const TracedValue<S>& alpha) {
  const Shape& s = x.shape();
  if (s.size() < 2) throw ShapeError("prelu: input needs a channel axis, got " + to_string(s));
  const std::size_t channels = s[1];
  require_vector(alpha, channels, "prelu alpha");
  const std::size_t inner = inner_extent(s);
  const auto& xv = x.value();
  const auto& av = alpha.value();
  BasicTensor<S> out(s);
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const S v = xv[i];
    out[i] = v >= S{0} ? v : av[(i / inner) % channels] * v;
  }
  const std::size_t xid = x.id(), aid = alpha.id();
  return x.tape().record(std::move(out), {xid, aid}, [channels, inner, xid, aid](Tape<S>& tp, std::size_t self) {
    const auto& g = tp.grad(self);
    const auto& xv = tp.value(xid);
    const auto& av = tp.value(aid);
    if (tp.requires_grad(xid)) {
      auto& gx = tp.grad(xid);
      for (std::size_t i = 0; i < xv.size(); ++i) gx[i] += xv[i] >= S{0} ? g[i] : av[(i / inner) % channels] * g[i];
    }
    if (tp.requires_grad(aid)) {
      std::vector<double> acc(channels, 0.0);
      for (std::size_t i = 0; i < xv.size(); ++i) {
        if (xv[i] < S{0}) acc[(i / inner) % channels] += static_cast<double>(g[i]) * xv[i];
      }
      auto& ga = tp.grad(aid);
      for (std::size_t c = 0; c < channels; ++c) ga[c] += static_cast<S>(acc[c]);
    }
  });
}

template <typename S>
TracedValue<S> relu(const TracedValue<S>& x) {
  const auto& xv = x.value();
  BasicTensor<S> out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] > S{0} ? xv[i] : S{0};
  const std::size_t xid = x.id();
  return x.tape().record(std::move(out), {xid}, [xid](Tape<S>& tp, std::size_t self) {
    const auto& g = tp.grad(self);
    const auto& xv = tp.value(xid);
    auto& gx = tp.grad(xid);
    for (std::size_t i = 0; i < xv.size(); ++i) {
      if (xv[i] > S{0}) gx[i] += g[i];
    }
  });
}

template <typename S>
TracedValue<S> avg_pool2(const TracedValue<S>& x) {
  const Dims5 d = dims5(x.shape(), "avg_pool2");
  if (d.h % 2 || d.w % 2) throw ShapeError("avg_pool2: H and W must be even, got " + to_string(x.shape()));
  const std::size_t oh = d.h / 2, ow = d.w / 2;
  const std::size_t planes = d.n * d.c * d.t;
  const auto& xv = x.value();
  BasicTensor<S> out({d.n, d.c, d.t, oh, ow});
  const S quarter = S{0.25};
  for (std::size_t p = 0; p < planes; ++p) {
    const S* in = xv.data().data() + p * d.plane();
    S* o = out.data().data() + p * oh * ow;
    for (std::size_t y = 0; y < oh; ++y) {
      const S* r0 = in + 2 * y * d.w;
      const S* r1 = r0 + d.w;
      for (std::size_t xx = 0; xx < ow; ++xx) {
        o[y * ow + xx] = (r0[2 * xx] + r0[2 * xx + 1] + r1[2 * xx] + r1[2 * xx + 1]) * quarter;
      }
    }
  }
  const std::size_t xid = x.id();
  return x.tape().record(std::move(out), {xid}, [d, oh, ow, planes, xid](Tape<S>& tp, std::size_t self) {
    const auto& g = tp.grad(self);
    auto& gx = tp.grad(xid);
    const S quarter = S{0.25};
    for (std::size_t p = 0; p < planes; ++p) {
      const S* go = g.data().data() + p * oh * ow;
      S* gi = gx.data().data() + p * d.plane();
      for (std::size_t y = 0; y < oh; ++y) {
        S* r0 = gi + 2 * y * d.w;
        S* r1 = r0 + d.w;
        for (std::size_t xx = 0; xx < ow; ++xx) {
          const S v = go[y * ow + xx] * quarter;
          r0[2 * xx] += v;
          r0[2 * xx + 1] += v;
          r1[2 * xx] += v;
          r1[2 * xx + 1] += v;
        }
      }
    }
  });
}

template <typename S>
TracedValue<S> max_pool2(const TracedValue<S>& x) {
  const Dims5 d = dims5(x.shape(), "max_pool2");
  if (d.h % 2 || d.w % 2) throw ShapeError("max_pool2: H and W must be even, got " + to_string(x.shape()));
  const std::size_t oh = d.h / 2, ow = d.w / 2;
  const std::size_t planes = d.n * d.c * d.t;
  const auto& xv = x.value();
  BasicTensor<S> out({d.n, d.c, d.t, oh, ow});
  std::vector<std::uint32_t> argmax(out.size());
  for (std::size_t p = 0; p < planes; ++p) {
    const std::size_t in_base = p * d.plane();
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t xx = 0; xx < ow; ++xx) {
        const std::size_t cand[4] = {in_base + 2 * y * d.w + 2 * xx, in_base + 2 * y * d.w + 2 * xx + 1,
                                     in_base + (2 * y + 1) * d.w + 2 * xx, in_base + (2 * y + 1) * d.w + 2 * xx + 1};
        std::size_t best = cand[0];
        for (int k = 1; k < 4; ++k) {
          if (xv[cand[k]] > xv[best]) best = cand[k];
        }
        const std::size_t o = p * oh * ow + y * ow + xx;
        out[o] = xv[best];
        argmax[o] = static_cast<std::uint32_t>(best);
      }
    }
  }
  const std::size_t xid = x.id();
  return x.tape().record(std::move(out), {xid}, [xid, argmax = std::move(argmax)](Tape<S>& tp, std::size_t self) {
    const auto& g = tp.grad(self);
    auto& gx = tp.grad(xid);
    for (std::size_t o = 0; o < argmax.size(); ++o) gx[argmax[o]] += g[o];
  });
}

template <typename S>
TracedValue<S> concat_channels(std::span<const TracedValue<S>> parts) {
  if (parts.empty()) throw ShapeError("concat_channels: no inputs");
  const Shape& first = parts[0].shape();
  if (first.size() < 2) throw ShapeError("concat_channels: inputs need a channel axis, got " + to_string(first));
  Shape out_shape = first;
  out_shape[1] = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    bool ok = s.size() == first.size() && s[0] == first[0];
    for (std::size_t i = 2; ok && i < s.size(); ++i) ok = s[i] == first[i];
    if (!ok) throw ShapeError("concat_channels: extent mismatch " + to_string(first) + " vs " + to_string(s));
    out_shape[1] += s[1];
  }
  const std::size_t outer = first[0];
  const std::size_t inner = inner_extent(first);
  const std::size_t row = out_shape[1] * inner;
  BasicTensor<S> out(out_shape);
  std::vector<std::size_t> ids, widths;
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const std::size_t width = p.shape()[1] * inner;
    const auto& v = p.value();
    for (std::size_t n = 0; n < outer; ++n) {
      std::copy_n(v.data().data() + n * width, width, out.data().data() + n * row + offset);
    }
    ids.push_back(p.id());
    widths.push_back(width);
    offset += width;
  }
  auto& tape = parts[0].tape();
  auto inputs = ids;
  return tape.record(std::move(out), std::move(inputs),
                     [outer, row, ids = std::move(ids), widths = std::move(widths)](Tape<S>& tp, std::size_t self) {
                       const auto& g = tp.grad(self);
                       std::size_t off = 0;
                       for (std::size_t k = 0; k < ids.size(); ++k) {
                         if (tp.requires_grad(ids[k])) {
                           auto& gp = tp.grad(ids[k]);
                           for (std::size_t n = 0; n < outer; ++n) {
                             const S* src = g.data().data() + n * row + off;
                             S* dst = gp.data().data() + n * widths[k];
                             for (std::size_t i = 0; i < widths[k]; ++i) dst[i] += src[i];
                           }
                         }
                         off += widths[k];
                       }
                     });
}

template <typename S>
TracedValue<S> concat_channels(const TracedValue<S>& a, const TracedValue<S>& b) {
  const TracedValue<S> parts[2] = {a, b};
  return concat_channels<S>(std::span<const TracedValue<S>>(parts));
}

template <typename S>
TracedValue<S> slice_channels(const TracedValue<S>& x, std::size_t begin, std::size_t count) {
  const Shape& s = x.shape();
  if (s.size() < 2 || count == 0 || begin + count > s[1]) {
    throw ShapeError("slice_channels: range [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                     ") outside " + to_string(s));
  }
  const std::size_t outer = s[0], inner = inner_extent(s);
  Shape out_shape = s;
  out_shape[1] = count;
  BasicTensor<S> out(out_shape);
  const std::size_t in_row = s[1] * inner, out_row = count * inner, off = begin * inner;
  const auto& v = x.value();
  for (std::size_t n = 0; n < outer; ++n) {
    std::copy_n(v.data().data() + n * in_row + off, out_row, out.data().data() + n * out_row);
  }
  const std::size_t xid = x.id();
  return x.tape().record(std::move(out), {xid}, [outer, in_row, out_row, off, xid](Tape<S>& tp, std::size_t self) {
    const auto& g = tp.grad(self);
    auto& gx = tp.grad(xid);
    for (std::size_t n = 0; n < outer; ++n) {
      for (std::size_t i = 0; i < out_row; ++i) gx[n * in_row + off + i] += g[n * out_row + i];
    }
  });
}

template <typename S>
TracedValue<S> time_slice_flatten(const TracedValue<S>& x, std::size_t t) {
  const Dims5 d = dims5(x.shape(), "time_slice_flatten");
  if (t >= d.t) throw ShapeError("time_slice_flatten: time index " + std::to_string(t) + " outside " + to_string(x.shape()));
  const std::size_t plane = d.plane();
  const std::size_t width = d.c * plane;
  BasicTensor<S> out({d.n, width});
  const auto& v = x.value();
  for (std::size_t n = 0; n < d.n; ++n) {
    for (std::size_t c = 0; c < d.c; ++c) {
      std::copy_n(v.data().data() + ((n * d.c + c) * d.t + t) * plane, plane, out.data().data() + n * width + c * plane);
    }
  }
  const std::size_t xid = x.id();
  return x.tape().record(std::move(out), {xid}, [d, t, plane, width, xid](Tape<S>& tp, std::size_t self) {
    const auto& g = tp.grad(self);
    auto& gx = tp.grad(xid);
    for (std::size_t n = 0; n < d.n; ++n) {
      for (std::size_t c = 0; c < d.c; ++c) {
        S* dst = gx.data().data() + ((n * d.c + c) * d.t + t) * plane;
        const S* src = g.data().data() + n * width + c * plane;
        for (std::size_t i = 0; i < plane; ++i) dst[i] += src[i];
      }
    }
  });
}

template <typename S>
TracedValue<S> fully_connected(const TracedValue<S>& x, const TracedValue<S>& weight, const TracedValue<S>& bias) {
  const Shape& xs = x.shape();
  const Shape& ws = weight.shape();
  if (xs.size() != 2 || ws.size() != 2 || xs[1] != ws[0]) {
    throw ShapeError("fully_connected: cannot map " + to_string(xs) + " with weight " + to_string(ws));
  }
  const std::size_t N = xs[0], D = xs[1], K = ws[1];
  require_vector(bias, K, "fully_connected bias");
  const auto& xv = x.value();
  const auto& wv = weight.value();
  const auto& bv = bias.value();
  BasicTensor<S> out({N, K});
  for (std::size_t n = 0; n < N; ++n) {
    S* o = out.data().data() + n * K;
    for (std::size_t k = 0; k < K; ++k) o[k] = bv[k];
    for (std::size_t dd = 0; dd < D; ++dd) {
      const S a = xv[n * D + dd];
      const S* wrow = wv.data().data() + dd * K;
      for (std::size_t k = 0; k < K; ++k) o[k] += a * wrow[k];
    }
  }
  const std::size_t xid = x.id(), wid = weight.id(), bid = bias.id();
  return x.tape().record(std::move(out), {xid, wid, bid}, [N, D, K, xid, wid, bid](Tape<S>& tp, std::size_t self) {
    const auto& g = tp.grad(self);
    if (tp.requires_grad(xid)) {
      const auto& wv = tp.value(wid);
      auto& gx = tp.grad(xid);
      for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t dd = 0; dd < D; ++dd) {
          S s = 0;
          for (std::size_t k = 0; k < K; ++k) s += g[n * K + k] * wv[dd * K + k];
          gx[n * D + dd] += s;
        }
      }
    }
    if (tp.requires_grad(wid)) {
      const auto& xv = tp.value(xid);
      auto& gw = tp.grad(wid);
      for (std::size_t dd = 0; dd < D; ++dd) {
        for (std::size_t k = 0; k < K; ++k) {
          double s = 0.0;
          for (std::size_t n = 0; n < N; ++n) s += static_cast<double>(xv[n * D + dd]) * g[n * K + k];
          gw[dd * K + k] += static_cast<S>(s);
        }
      }
    }
    if (tp.requires_grad(bid)) {
      auto& gb = tp.grad(bid);
      for (std::size_t k = 0; k < K; ++k) {
        double s = 0.0;
        for (std::size_t n = 0; n < N; ++n) s += g[n * K + k];
        gb[k] += static_cast<S>(s);
      }
    }
  });
}

template <typename S>
TracedValue<S> add(const TracedValue<S>& a, const TracedValue<S>& b) {
  require_same_shape(a.shape(), b.shape(), "add");
  BasicTensor<S> out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] + b.value()[i];
  const std::size_t aid = a.id(), bid = b.id();
  return a.tape().record(std::move(out), {aid, bid}, [aid, bid](Tape<S>& tp, std::size_t self) {
    const auto& g = tp.grad(self);
    for (std::size_t id : {aid, bid}) {
      if (!tp.requires_grad(id)) continue;
      auto& gi = tp.grad(id);
      for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
    }
  });
}

template <typename S>
TracedValue<S> sub(const TracedValue<S>& a, const TracedValue<S>& b) {
  require_same_shape(a.shape(), b.shape(), "sub");
  BasicTensor<S> out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] - b.value()[i];
  const std::size_t aid = a.id(), bid = b.id();
  return a.tape().record(std::move(out), {aid, bid}, [aid, bid](Tape<S>& tp, std::size_t self) {
    const auto& g = tp.grad(self);
    if (tp.requires_grad(aid)) {
      auto& ga = tp.grad(aid);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (tp.requires_grad(bid)) {
      auto& gb = tp.grad(bid);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

template <typename S>
TracedValue<S> mul(const TracedValue<S>& a, const TracedValue<S>& b) {
  require_same_shape(a.shape(), b.shape(), "mul");
  BasicTensor<S> out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * b.value()[i];
  const std::size_t aid = a.id(), bid = b.id();
  return a.tape().record(std::move(out), {aid, bid}, [aid, bid](Tape<S>& tp, std::size_t self) {
    const auto& g = tp.grad(self);
    if (tp.requires_grad(aid)) {
      const auto& bv = tp.value(bid);
      auto& ga = tp.grad(aid);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (tp.requires_grad(bid)) {
      const auto& av = tp.value(aid);
      auto& gb = tp.grad(bid);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

template <typename S>
TracedValue<S> sum(const TracedValue<S>& x) {
  double s = 0.0;
  for (S v : x.value().data()) s += v;
  const std::size_t xid = x.id();
  return x.tape().record(BasicTensor<S>::scalar(static_cast<S>(s)), {xid}, [xid](Tape<S>& tp, std::size_t self) {
    const S g = tp.grad(self)[0];
    auto& gx = tp.grad(xid);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g;
  });
}

template <typename S>
TracedValue<S> mse_loss(const TracedValue<S>& pred, const BasicTensor<S>& target) {
  require_same_shape(pred.shape(), target.shape(), "mse_loss");
  const auto& pv = pred.value();
  double s = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double dv = static_cast<double>(pv[i]) - target[i];
    s += dv * dv;
  }
  const double count = static_cast<double>(pv.size());
  const std::size_t pid = pred.id();
  return pred.tape().record(BasicTensor<S>::scalar(static_cast<S>(s / count)), {pid},
                            [pid, target, count](Tape<S>& tp, std::size_t self) {
                              const double g = tp.grad(self)[0];
                              const auto& pv = tp.value(pid);
                              auto& gp = tp.grad(pid);
                              const double scale = 2.0 * g / count;
                              for (std::size_t i = 0; i < pv.size(); ++i) {
                                gp[i] += static_cast<S>(scale * (static_cast<double>(pv[i]) - target[i]));
                              }
                            });
}

#define PIDCNN_INSTANTIATE_OPS(S)                                                                              \
  template TracedValue<S> conv_ct33(const TracedValue<S>&, const TracedValue<S>&, const TracedValue<S>&);    \
  template TracedValue<S> batch_norm(const TracedValue<S>&, const TracedValue<S>&, const TracedValue<S>&,    \
                                     RunningStats<S>&, const BatchNormOptions&);                              \
  template TracedValue<S> prelu(const TracedValue<S>&, const TracedValue<S>&);                                \
  template TracedValue<S> relu(const TracedValue<S>&);                                                        \
  template TracedValue<S> avg_pool2(const TracedValue<S>&);                                                   \
  template TracedValue<S> max_pool2(const TracedValue<S>&);                                                   \
  template TracedValue<S> concat_channels(std::span<const TracedValue<S>>);                                   \
  template TracedValue<S> concat_channels(const TracedValue<S>&, const TracedValue<S>&);                      \
  template TracedValue<S> slice_channels(const TracedValue<S>&, std::size_t, std::size_t);                    \
  template TracedValue<S> time_slice_flatten(const TracedValue<S>&, std::size_t);                             \
  template TracedValue<S> fully_connected(const TracedValue<S>&, const TracedValue<S>&, const TracedValue<S>&); \
  template TracedValue<S> add(const TracedValue<S>&, const TracedValue<S>&);                                  \
  template TracedValue<S> sub(const TracedValue<S>&, const TracedValue<S>&);                                  \
  template TracedValue<S> mul(const TracedValue<S>&, const TracedValue<S>&);                                  \
  template TracedValue<S> sum(const TracedValue<S>&);                                                         \
  template TracedValue<S> mse_loss(const TracedValue<S>&, const BasicTensor<S>&);

PIDCNN_INSTANTIATE_OPS(float)
PIDCNN_INSTANTIATE_OPS(double)

#undef PIDCNN_INSTANTIATE_OPS

}  // namespace pidcnn
