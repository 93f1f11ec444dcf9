#include "upw/model_config.hpp"

#include <sstream>

#include "upw/attention.hpp"
#include "upw/error.hpp"

namespace upw {

ModelConfig ModelConfig::tiny() {
    ModelConfig c;
    c.dim = 32;
    c.layers = 2;
    c.heads = 4;
    c.kv_heads = 2;
    c.image_dim = 32;
    c.image_layers = 2;
    c.fold_factor = 32;
    c.image_size = 8;
    c.window_size = 4;
    return c;
}

void ModelConfig::validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorKind::Config, "model config: " + msg); };
    if (dim == 0 || heads == 0 || kv_heads == 0 || image_dim == 0 || image_size == 0 || window_size == 0) {
        fail("dim, heads, kv_heads, image_dim, image_size and window_size must be positive");
    }
    check_head_grouping(heads, kv_heads);
    if (dim % heads != 0) fail("dim must be a multiple of heads");
    if (image_dim % heads != 0) fail("image_dim must be a multiple of heads");
    try {
        (void)factor();
    } catch (const Error& e) {
        fail(e.what());
    }
    if (sub_window != 0 && window_size % sub_window != 0) fail("sub_window must divide window_size");
    if (global_context() < 2) fail("max_seq_len must allow at least two positions");
}

std::string ModelConfig::to_key_values() const {
    std::ostringstream out;
    out << "dim=" << dim << '\n'
        << "layers=" << layers << '\n'
        << "heads=" << heads << '\n'
        << "kv_heads=" << kv_heads << '\n'
        << "image_dim=" << image_dim << '\n'
        << "image_layers=" << image_layers << '\n'
        << "fold_factor=" << fold_factor << '\n'
        << "image_size=" << image_size << '\n'
        << "window_size=" << window_size << '\n'
        << "sub_window=" << sub_window << '\n'
        << "max_seq_len=" << max_seq_len << '\n';
    return out.str();
}

ModelConfig ModelConfig::take_from(KeyValues& kv, const ModelConfig& base) {
    ModelConfig c;
    c.dim = take_size(kv, "dim", base.dim);
    c.layers = take_size(kv, "layers", base.layers);
    c.heads = take_size(kv, "heads", base.heads);
    c.kv_heads = take_size(kv, "kv_heads", base.kv_heads);
    c.image_dim = take_size(kv, "image_dim", base.image_dim);
    c.image_layers = take_size(kv, "image_layers", base.image_layers);
    c.fold_factor = take_size(kv, "fold_factor", base.fold_factor);
    c.image_size = take_size(kv, "image_size", base.image_size);
    c.window_size = take_size(kv, "window_size", base.window_size);
    c.sub_window = take_size(kv, "sub_window", base.sub_window);
    c.max_seq_len = take_size(kv, "max_seq_len", base.max_seq_len);
    return c;
}

ModelConfig ModelConfig::take_from(KeyValues& kv) { return take_from(kv, ModelConfig{}); }

}  // namespace upw
