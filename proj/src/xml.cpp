#include "autobench/xml.hpp"

#include <expat.h>

#include <charconv>
#include <limits>
#include <optional>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

namespace autobench::xml {

const char* to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::Syntax: return "Syntax";
    case ErrorKind::UnknownElement: return "UnknownElement";
    case ErrorKind::MissingAttribute: return "MissingAttribute";
    case ErrorKind::BadReference: return "BadReference";
    case ErrorKind::BadNumber: return "BadNumber";
    case ErrorKind::Constraint: return "Constraint";
    }
    return "?";
}

namespace {

std::string summarize(const std::vector<ParseError>& errors)
{
    std::ostringstream os;
    os << errors.size() << " error(s) parsing model";
    if (!errors.empty()) {
        const auto& e = errors.front();
        os << "; first at " << e.line << ":" << e.column << ": " << e.message;
    }
    return os.str();
}

std::string summarize(const std::vector<Violation>& violations)
{
    std::ostringstream os;
    os << "model has " << violations.size() << " violation(s)";
    if (!violations.empty())
        os << "; first: " << violations.front().entity << ": " << violations.front().message;
    return os.str();
}

}  // namespace

ParseFailure::ParseFailure(std::vector<ParseError> errors)
    : std::runtime_error(summarize(errors)), errors_(std::move(errors))
{
}

InvalidModel::InvalidModel(std::vector<Violation> violations)
    : std::runtime_error(summarize(violations)), violations_(std::move(violations))
{
}

namespace {

struct Node {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attrs;
    int line = 0;
    int column = 0;
    std::vector<Node> children;
};

// Builds a small element tree with source positions. Expat reports
// well-formedness problems; everything else is checked on the tree.
class TreeBuilder {
public:
    TreeBuilder() : parser_(XML_ParserCreate("UTF-8"), &XML_ParserFree)
    {
        XML_SetUserData(parser_.get(), this);
        XML_SetElementHandler(parser_.get(), &TreeBuilder::on_start, &TreeBuilder::on_end);
        XML_SetCharacterDataHandler(parser_.get(), &TreeBuilder::on_text);
    }

    std::optional<Node> build(std::string_view doc, std::vector<ParseError>& errors)
    {
        errors_ = &errors;
        if (doc.size() > static_cast<std::size_t>(std::numeric_limits<int>::max())) {
            errors.push_back({1, 1, ErrorKind::Syntax, "document too large"});
            return std::nullopt;
        }
        if (XML_Parse(parser_.get(), doc.data(), static_cast<int>(doc.size()), XML_TRUE) ==
            XML_STATUS_ERROR) {
            errors.push_back({static_cast<int>(XML_GetCurrentLineNumber(parser_.get())),
                              static_cast<int>(XML_GetCurrentColumnNumber(parser_.get())) + 1,
                              ErrorKind::Syntax,
                              XML_ErrorString(XML_GetErrorCode(parser_.get()))});
            return std::nullopt;
        }
        return std::move(root_);
    }

private:
    static void on_start(void* self, const XML_Char* name, const XML_Char** attrs)
    {
        auto* b = static_cast<TreeBuilder*>(self);
        Node n;
        n.name = name;
        n.line = static_cast<int>(XML_GetCurrentLineNumber(b->parser_.get()));
        n.column = static_cast<int>(XML_GetCurrentColumnNumber(b->parser_.get())) + 1;
        for (int i = 0; attrs[i]; i += 2)
            n.attrs.emplace_back(attrs[i], attrs[i + 1]);
        b->stack_.push_back(std::move(n));
    }

    static void on_end(void* self, const XML_Char*)
    {
        auto* b = static_cast<TreeBuilder*>(self);
        Node n = std::move(b->stack_.back());
        b->stack_.pop_back();
        if (b->stack_.empty())
            b->root_ = std::move(n);
        else
            b->stack_.back().children.push_back(std::move(n));
    }

    static void on_text(void* self, const XML_Char* s, int len)
    {
        auto* b = static_cast<TreeBuilder*>(self);
        for (int i = 0; i < len; ++i) {
            const char c = s[i];
            if (c != ' ' && c != '\t' && c != '\n' && c != '\r') {
                b->errors_->push_back(
                    {static_cast<int>(XML_GetCurrentLineNumber(b->parser_.get())),
                     static_cast<int>(XML_GetCurrentColumnNumber(b->parser_.get())) + 1,
                     ErrorKind::Syntax, "unexpected text content"});
                return;
            }
        }
    }

    std::unique_ptr<XML_ParserStruct, decltype(&XML_ParserFree)> parser_;
    std::vector<Node> stack_;
    std::optional<Node> root_;
    std::vector<ParseError>* errors_ = nullptr;
};

struct Pos {
    int line = 0;
    int column = 0;
};

// Reads and checks the attributes of one element. Each accessor marks the
// attribute as known; finish() reports the ones nobody asked for.
class Attrs {
public:
    Attrs(const Node& n, std::vector<ParseError>& errors, std::vector<Warning>& warnings)
        : node_(n), errors_(errors), warnings_(warnings)
    {
    }

    std::optional<std::string> opt(const char* key)
    {
        used_.insert(key);
        for (const auto& [k, v] : node_.attrs)
            if (k == key)
                return v;
        return std::nullopt;
    }

    std::optional<std::string> req(const char* key)
    {
        auto v = opt(key);
        if (!v)
            error(ErrorKind::MissingAttribute,
                  "<" + node_.name + "> requires attribute '" + key + "'");
        return v;
    }

    template <typename Int>
    std::optional<Int> number(const char* key, bool required)
    {
        auto text = required ? req(key) : opt(key);
        if (!text)
            return std::nullopt;
        return to_number<Int>(*text, key);
    }

    template <typename Int>
    std::optional<Int> to_number(const std::string& text, const char* what)
    {
        Int value{};
        const char* first = text.data();
        const char* last = text.data() + text.size();
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (text.empty() || ec != std::errc() || ptr != last) {
            error(ErrorKind::BadNumber, "attribute '" + std::string(what) + "' of <" +
                                            node_.name + ">: '" + text + "' is not a valid integer");
            return std::nullopt;
        }
        return value;
    }

    void finish()
    {
        for (const auto& [k, v] : node_.attrs) {
            if (used_.count(k))
                continue;
            if (k == "xmlns" || k.find(':') != std::string::npos)
                warnings_.push_back({node_.line, node_.column,
                                     "ignoring namespaced attribute '" + k + "' on <" +
                                         node_.name + ">"});
            else
                error(ErrorKind::UnknownElement,
                      "unknown attribute '" + k + "' on <" + node_.name + ">");
        }
    }

    void error(ErrorKind kind, std::string message)
    {
        errors_.push_back({node_.line, node_.column, kind, std::move(message)});
    }

private:
    const Node& node_;
    std::vector<ParseError>& errors_;
    std::vector<Warning>& warnings_;
    std::set<std::string> used_;
};

class ModelReader {
public:
    ModelReader(std::vector<ParseError>& errors, std::vector<Warning>& warnings)
        : errors_(errors), warnings_(warnings)
    {
    }

    AmaltheaModel read(const Node& root)
    {
        if (root.name != "amalthea") {
            error(root, ErrorKind::UnknownElement,
                  "root element must be <amalthea>, found <" + root.name + ">");
            return {};
        }
        Attrs(root, errors_, warnings_).finish();

        declare(root);
        for (const auto& section : root.children) {
            if (section.name == "swModel")
                read_sw(section);
            else if (section.name == "hwModel")
                read_hw(section);
        }
        if (!errors_.empty())
            return {};

        AmaltheaModel m;
        for (auto& l : labels_) m.add_label(std::move(l));
        for (auto& r : runnables_) m.add_runnable(std::move(r));
        for (auto& s : stimuli_) m.add_stimulus(std::move(s));
        for (auto& t : tasks_) m.add_task(std::move(t));
        for (auto& ct : core_types_) m.add_core_type(std::move(ct));
        for (auto& q : quartzes_) m.add_quartz(std::move(q));
        for (auto& c : cores_) m.add_core(std::move(c));

        for (const auto& v : validate(m)) {
            const auto it = positions_.find(v.entity);
            const Pos p = it == positions_.end() ? Pos{root.line, root.column} : it->second;
            errors_.push_back({p.line, p.column, ErrorKind::Constraint, v.entity + ": " + v.message});
        }
        return m;
    }

private:
    void error(const Node& n, ErrorKind kind, std::string message)
    {
        errors_.push_back({n.line, n.column, kind, std::move(message)});
    }

    // First pass: every ID by kind, so references may point forward.
    void declare(const Node& root)
    {
        static const std::map<std::string, std::string> kinds = {
            {"label", "label"},       {"runnable", "runnable"}, {"stimulus", "stimulus"},
            {"task", "task"},         {"coreType", "core type"}, {"quartz", "quartz"},
            {"core", "core"},
        };
        for (const auto& section : root.children) {
            if (section.name != "swModel" && section.name != "hwModel") {
                error(section, ErrorKind::UnknownElement,
                      "unknown element <" + section.name + "> in <amalthea>");
                continue;
            }
            for (const auto& e : section.children) {
                auto k = kinds.find(e.name);
                if (k == kinds.end())
                    continue;
                for (const auto& [key, value] : e.attrs) {
                    if (key != "id")
                        continue;
                    if (!ids_[k->second].insert(value).second)
                        error(e, ErrorKind::Constraint,
                              "duplicate " + k->second + " id '" + value + "'");
                    else
                        positions_.emplace(k->second + " " + value, Pos{e.line, e.column});
                }
            }
        }
    }

    bool resolves(const Node& n, const char* kind, const std::string& id)
    {
        if (ids_[kind].count(id))
            return true;
        error(n, ErrorKind::BadReference,
              "<" + n.name + "> refers to undeclared " + kind + " '" + id + "'");
        return false;
    }

    std::vector<std::string> label_refs(const Node& runnable, const char* element)
    {
        std::vector<std::string> out;
        for (const auto& c : runnable.children) {
            if (c.name != element)
                continue;
            Attrs a(c, errors_, warnings_);
            if (auto id = a.req("label"); id && resolves(c, "label", *id))
                out.push_back(*id);
            a.finish();
        }
        return out;
    }

    void read_sw(const Node& section)
    {
        Attrs(section, errors_, warnings_).finish();
        for (const auto& e : section.children) {
            Attrs a(e, errors_, warnings_);
            if (e.name == "label") {
                Label l;
                l.id = a.req("id").value_or("");
                l.name = a.req("name").value_or("");
                l.bit_length = a.number<std::uint32_t>("bitLength", true).value_or(1);
                labels_.push_back(std::move(l));
            } else if (e.name == "runnable") {
                Runnable r;
                r.id = a.req("id").value_or("");
                r.name = a.req("name").value_or("");
                r.size_bits = a.number<std::uint64_t>("sizeBits", true).value_or(0);
                r.bcet_instructions = a.number<std::uint64_t>("bcet", true).value_or(1);
                r.wcet_instructions = a.number<std::uint64_t>("wcet", true).value_or(1);
                for (const auto& c : e.children)
                    if (c.name != "read" && c.name != "write")
                        error(c, ErrorKind::UnknownElement,
                              "unknown element <" + c.name + "> in <runnable>");
                r.reads = label_refs(e, "read");
                r.writes = label_refs(e, "write");
                runnables_.push_back(std::move(r));
            } else if (e.name == "stimulus") {
                read_stimulus(e, a);
            } else if (e.name == "task") {
                Task t;
                t.id = a.req("id").value_or("");
                t.name = a.req("name").value_or("");
                t.priority = a.number<std::uint32_t>("priority", true).value_or(0);
                if (auto s = a.req("stimulus"); s && resolves(e, "stimulus", *s))
                    t.stimulus = *s;
                for (const auto& c : e.children) {
                    if (c.name != "call") {
                        error(c, ErrorKind::UnknownElement,
                              "unknown element <" + c.name + "> in <task>");
                        continue;
                    }
                    Attrs ca(c, errors_, warnings_);
                    if (auto r = ca.req("runnable"); r && resolves(c, "runnable", *r))
                        t.runnables.push_back(*r);
                    ca.finish();
                }
                tasks_.push_back(std::move(t));
            } else {
                error(e, ErrorKind::UnknownElement, "unknown element <" + e.name + "> in <swModel>");
                continue;
            }
            if (e.name != "runnable" && e.name != "task")
                no_children(e);
            a.finish();
        }
    }

    void read_stimulus(const Node& e, Attrs& a)
    {
        Stimulus s;
        s.id = a.req("id").value_or("");
        const auto type = a.req("type");
        if (!type) {
            stimuli_.push_back(std::move(s));
            return;
        }
        if (*type == "periodic") {
            Periodic p;
            p.period = a.number<Micros>("period", true).value_or(1);
            p.offset = a.number<Micros>("offset", false).value_or(0);
            s.kind = p;
        } else if (*type == "sporadic") {
            s.kind = Sporadic{a.number<Micros>("minInterArrival", true).value_or(1)};
        } else if (*type == "single") {
            s.kind = Single{a.number<Micros>("time", true).value_or(0)};
        } else if (*type == "pattern") {
            Pattern p;
            if (auto times = a.req("times")) {
                std::istringstream is(*times);
                std::string tok;
                while (is >> tok)
                    if (auto v = a.to_number<Micros>(tok, "times"))
                        p.times.push_back(*v);
            }
            s.kind = p;
        } else if (*type == "interProcess") {
            InterProcess ip;
            if (auto l = a.req("triggerLabel"); l && resolves(e, "label", *l))
                ip.trigger_label = *l;
            ip.injection_period = a.number<Micros>("injectionPeriod", false);
            s.kind = ip;
        } else {
            a.error(ErrorKind::UnknownElement, "unknown stimulus type '" + *type + "'");
        }
        stimuli_.push_back(std::move(s));
    }

    void read_hw(const Node& section)
    {
        Attrs(section, errors_, warnings_).finish();
        for (const auto& e : section.children) {
            Attrs a(e, errors_, warnings_);
            if (e.name == "coreType") {
                CoreType ct;
                ct.id = a.req("id").value_or("");
                ct.ticks_per_instruction = a.number<std::uint32_t>("ticksPerInstruction", true).value_or(1);
                core_types_.push_back(std::move(ct));
            } else if (e.name == "quartz") {
                Quartz q;
                q.id = a.req("id").value_or("");
                q.frequency_hz = a.number<std::uint64_t>("frequencyHz", true).value_or(1);
                quartzes_.push_back(std::move(q));
            } else if (e.name == "core") {
                Core c;
                c.id = a.req("id").value_or("");
                c.name = a.req("name").value_or("");
                if (auto ct = a.req("coreType"); ct && resolves(e, "core type", *ct))
                    c.core_type = *ct;
                if (auto q = a.req("quartz"); q && resolves(e, "quartz", *q))
                    c.quartz = *q;
                c.position.x = a.number<int>("x", true).value_or(0);
                c.position.y = a.number<int>("y", true).value_or(0);
                cores_.push_back(std::move(c));
            } else {
                error(e, ErrorKind::UnknownElement, "unknown element <" + e.name + "> in <hwModel>");
                continue;
            }
            no_children(e);
            a.finish();
        }
    }

    void no_children(const Node& e)
    {
        for (const auto& c : e.children)
            error(c, ErrorKind::UnknownElement,
                  "unknown element <" + c.name + "> in <" + e.name + ">");
    }

    std::vector<ParseError>& errors_;
    std::vector<Warning>& warnings_;
    std::map<std::string, std::set<std::string>> ids_;
    std::map<std::string, Pos> positions_;  // "<kind> <id>" -> declaring element

    std::vector<Label> labels_;
    std::vector<Runnable> runnables_;
    std::vector<Stimulus> stimuli_;
    std::vector<Task> tasks_;
    std::vector<CoreType> core_types_;
    std::vector<Quartz> quartzes_;
    std::vector<Core> cores_;
};

}  // namespace

ParseResult parse(std::string_view document)
{
    std::vector<ParseError> errors;
    ParseResult result;
    auto root = TreeBuilder().build(document, errors);
    if (root && errors.empty())
        result.model = ModelReader(errors, result.warnings).read(*root);
    if (!errors.empty())
        throw ParseFailure(std::move(errors));
    return result;
}

ParseResult parse_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

namespace {

std::string escape(const std::string& s)
{
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\n': out += "&#10;"; break;
        case '\r': out += "&#13;"; break;
        case '\t': out += "&#9;"; break;
        default: out += c;
        }
    }
    return out;
}

class Writer {
public:
    void open(int depth, const char* name) { os_ << std::string(depth * 2, ' ') << '<' << name; }
    template <typename T>
    void attr(const char* key, const T& value)
    {
        if constexpr (std::is_convertible_v<T, std::string>)
            os_ << ' ' << key << "=\"" << escape(value) << '"';
        else
            os_ << ' ' << key << "=\"" << value << '"';
    }
    void end_empty() { os_ << "/>\n"; }
    void end_open() { os_ << ">\n"; }
    void close(int depth, const char* name) { os_ << std::string(depth * 2, ' ') << "</" << name << ">\n"; }
    void raw(const char* s) { os_ << s; }
    std::string str() const { return os_.str(); }

private:
    std::ostringstream os_;
};

}  // namespace

std::string serialize(const AmaltheaModel& m)
{
    if (auto v = validate(m); !v.empty())
        throw InvalidModel(std::move(v));

    Writer w;
    w.raw("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<amalthea>\n");
    w.raw("  <swModel>\n");
    for (const auto& l : m.labels()) {
        w.open(2, "label");
        w.attr("id", l.id);
        w.attr("name", l.name);
        w.attr("bitLength", l.bit_length);
        w.end_empty();
    }
    for (const auto& r : m.runnables()) {
        w.open(2, "runnable");
        w.attr("id", r.id);
        w.attr("name", r.name);
        w.attr("sizeBits", r.size_bits);
        w.attr("bcet", r.bcet_instructions);
        w.attr("wcet", r.wcet_instructions);
        if (r.reads.empty() && r.writes.empty()) {
            w.end_empty();
            continue;
        }
        w.end_open();
        for (const auto& id : r.reads) {
            w.open(3, "read");
            w.attr("label", id);
            w.end_empty();
        }
        for (const auto& id : r.writes) {
            w.open(3, "write");
            w.attr("label", id);
            w.end_empty();
        }
        w.close(2, "runnable");
    }
    for (const auto& s : m.stimuli()) {
        w.open(2, "stimulus");
        w.attr("id", s.id);
        w.attr("type", std::string(stimulus_kind_name(s.kind)));
        std::visit(
            [&](const auto& k) {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, Periodic>) {
                    w.attr("period", k.period);
                    w.attr("offset", k.offset);
                } else if constexpr (std::is_same_v<K, Sporadic>) {
                    w.attr("minInterArrival", k.min_inter_arrival);
                } else if constexpr (std::is_same_v<K, Single>) {
                    w.attr("time", k.time);
                } else if constexpr (std::is_same_v<K, Pattern>) {
                    std::string times;
                    for (auto t : k.times)
                        times += (times.empty() ? "" : " ") + std::to_string(t);
                    w.attr("times", times);
                } else {
                    w.attr("triggerLabel", k.trigger_label);
                    if (k.injection_period)
                        w.attr("injectionPeriod", *k.injection_period);
                }
            },
            s.kind);
        w.end_empty();
    }
    for (const auto& t : m.tasks()) {
        w.open(2, "task");
        w.attr("id", t.id);
        w.attr("name", t.name);
        w.attr("priority", t.priority);
        w.attr("stimulus", t.stimulus);
        w.end_open();
        for (const auto& r : t.runnables) {
            w.open(3, "call");
            w.attr("runnable", r);
            w.end_empty();
        }
        w.close(2, "task");
    }
    w.raw("  </swModel>\n");

    w.raw("  <hwModel>\n");
    for (const auto& ct : m.core_types()) {
        w.open(2, "coreType");
        w.attr("id", ct.id);
        w.attr("ticksPerInstruction", ct.ticks_per_instruction);
        w.end_empty();
    }
    for (const auto& q : m.quartzes()) {
        w.open(2, "quartz");
        w.attr("id", q.id);
        w.attr("frequencyHz", q.frequency_hz);
        w.end_empty();
    }
    for (const auto& c : m.cores()) {
        w.open(2, "core");
        w.attr("id", c.id);
        w.attr("name", c.name);
        w.attr("coreType", c.core_type);
        w.attr("quartz", c.quartz);
        w.attr("x", c.position.x);
        w.attr("y", c.position.y);
        w.end_empty();
    }
    w.raw("  </hwModel>\n</amalthea>\n");
    return w.str();
}

}  // namespace autobench::xml
