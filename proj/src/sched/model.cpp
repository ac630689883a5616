#include "peakopt/sched/model.hpp"

#include "peakopt/errors.hpp"
#include "peakopt/io.hpp"
#include "peakopt/series/csv.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace peakopt::sched {

int Instance::recurrence_window() const
{
    return std::min(series::kPeriodsPerWeek, n_periods());
}

int Instance::activity_index(std::string_view id) const
{
    for (std::size_t i = 0; i < activities.size(); ++i) {
        if (activities[i].id == id) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

std::vector<Interval> occurrences(const Instance& inst, const Activity& a, int start)
{
    std::vector<Interval> out;
    const int n = inst.n_periods();
    if (a.recurring()) {
        for (int o = start; o < n; o += series::kPeriodsPerWeek) {
            out.push_back({o, std::min(o + a.duration, n)});
        }
    } else {
        out.push_back({start, std::min(start + a.duration, n)});
    }
    return out;
}

bool start_admissible(const Instance& inst, const Activity& a, int start)
{
    const int limit = a.recurring() ? inst.recurrence_window() : inst.n_periods();
    if (start < 0 || start + a.duration > limit) {
        return false;
    }
    return a.allowed_starts.empty() || std::binary_search(a.allowed_starts.begin(), a.allowed_starts.end(), start);
}

std::vector<int> admissible_starts(const Instance& inst, const Activity& a)
{
    std::vector<int> out;
    if (!a.allowed_starts.empty()) {
        for (int s : a.allowed_starts) {
            if (start_admissible(inst, a, s)) {
                out.push_back(s);
            }
        }
        return out;
    }
    const int limit = a.recurring() ? inst.recurrence_window() : inst.n_periods();
    for (int s = 0; s + a.duration <= limit; ++s) {
        out.push_back(s);
    }
    return out;
}

bool runs_in_peak(const Instance& inst, const Activity& a, int start)
{
    for (const auto& iv : occurrences(inst, a, start)) {
        for (int t = iv.begin; t < iv.end; ++t) {
            if (!inst.calendar.is_peak(t)) {
                return false;
            }
        }
    }
    return true;
}

Schedule empty_schedule(const Instance& inst)
{
    Schedule s;
    s.n_periods = inst.n_periods();
    for (const auto& b : inst.batteries) {
        s.battery_actions[b.id].assign(static_cast<std::size_t>(s.n_periods), 0.0);
    }
    return s;
}

std::vector<double> activity_load(const Instance& inst, const Schedule& s)
{
    std::vector<double> out(static_cast<std::size_t>(inst.n_periods()), 0.0);
    for (const auto& a : inst.activities) {
        const auto it = s.starts.find(a.id);
        if (it == s.starts.end()) {
            continue;
        }
        for (const auto& iv : occurrences(inst, a, it->second)) {
            for (int t = std::max(iv.begin, 0); t < iv.end; ++t) {
                out[static_cast<std::size_t>(t)] += a.load();
            }
        }
    }
    return out;
}

std::vector<double> battery_power(const Instance& inst, const Schedule& s)
{
    std::vector<double> out(static_cast<std::size_t>(inst.n_periods()), 0.0);
    for (const auto& [id, actions] : s.battery_actions) {
        for (std::size_t t = 0; t < out.size() && t < actions.size(); ++t) {
            out[t] += actions[t];
        }
    }
    return out;
}

// ---- instance document -----------------------------------------------------

namespace {

constexpr std::string_view kInstanceMagic = "peakopt-instance v1";
constexpr std::string_view kScheduleMagic = "peakopt-schedule v1";

[[noreturn]] void fail(std::size_t line, const std::string& msg)
{
    throw ParseError("line " + std::to_string(line) + ": " + msg);
}

std::vector<std::string_view> document_lines(std::string_view text, std::string_view magic)
{
    std::vector<std::string_view> lines;
    for (auto line : split(text, '\n')) {
        const auto hash = line.find('#');
        lines.push_back(trim(hash == std::string_view::npos ? line : line.substr(0, hash)));
    }
    std::size_t first = 0;
    while (first < lines.size() && lines[first].empty()) {
        ++first;
    }
    if (first == lines.size() || lines[first] != magic) {
        throw ParseError("document must start with '" + std::string(magic) + "'");
    }
    lines[first] = {};
    return lines;
}

std::array<bool, 7> parse_weekdays(std::string_view text, std::size_t line)
{
    std::array<bool, 7> days{};
    for (auto tok : split(text, ',')) {
        const long d = parse_integer(tok);
        if (d < 0 || d > 6) {
            fail(line, "weekday must be 0..6");
        }
        days[static_cast<std::size_t>(d)] = true;
    }
    return days;
}

struct SeriesSource {
    bool inline_values = false;
    std::vector<double> values;
    std::vector<bool> mask;
    std::filesystem::path file;
    bool set = false;
};

SeriesSource parse_series_ref(const std::vector<std::string_view>& tok, std::size_t line)
{
    SeriesSource src;
    src.set = true;
    if (tok.size() == 3 && tok[1] == "file") {
        src.file = std::string(tok[2]);
        return src;
    }
    if (tok.size() >= 2 && tok[1] == "inline") {
        src.inline_values = true;
        for (std::size_t i = 2; i < tok.size(); ++i) {
            if (tok[i] == "NA") {
                src.values.push_back(0.0);
                src.mask.push_back(false);
            } else {
                src.values.push_back(parse_number(tok[i]));
                src.mask.push_back(true);
            }
        }
        return src;
    }
    fail(line, "expected '" + std::string(tok[0]) + " file <path>' or '" + std::string(tok[0]) + " inline <values>'");
}

TimeSeries materialise(const SeriesSource& src, const PeriodCalendar& cal, const std::filesystem::path& base_dir,
                       std::string_view what)
{
    if (!src.set) {
        throw ParseError("instance is missing its " + std::string(what) + " series");
    }
    if (src.inline_values) {
        if (static_cast<int>(src.values.size()) != cal.n_periods()) {
            throw ShapeError(std::string(what) + " series has " + std::to_string(src.values.size())
                             + " values, horizon has " + std::to_string(cal.n_periods()));
        }
        return TimeSeries(cal, src.values, src.mask);
    }
    const auto path = src.file.is_absolute() ? src.file : base_dir / src.file;
    const auto s = series::parse_series_csv(read_text_file(path), cal.peak_windows(), cal.holidays());
    if (!(s.calendar() == cal)) {
        throw ShapeError(std::string(what) + " series in " + path.string() + " does not match the instance horizon");
    }
    return s;
}

void check_instance(const Instance& inst)
{
    std::set<std::string_view> ids;
    for (const auto& a : inst.activities) {
        if (!ids.insert(a.id).second) {
            throw ValidationError("duplicate activity id '" + a.id + "'");
        }
        if (a.duration < 1 || a.n_rooms < 1 || a.load_per_room < 0.0) {
            throw ValidationError("activity '" + a.id + "' needs duration >= 1, rooms >= 1, load >= 0");
        }
        if (a.recurring() && (a.value != 0.0 || a.penalty != 0.0)) {
            throw ValidationError("recurring activity '" + a.id + "' cannot carry value or penalty");
        }
        if (a.n_rooms > inst.n_rooms_total) {
            throw ValidationError("activity '" + a.id + "' needs more rooms than exist");
        }
        for (int s : a.allowed_starts) {
            if (!start_admissible(inst, a, s)) {
                throw ValidationError("activity '" + a.id + "' lists inadmissible start " + std::to_string(s));
            }
        }
        if (admissible_starts(inst, a).empty()) {
            throw ValidationError("activity '" + a.id + "' has no admissible start");
        }
    }
    std::set<std::string_view> bids;
    for (const auto& b : inst.batteries) {
        if (!bids.insert(b.id).second) {
            throw ValidationError("duplicate battery id '" + b.id + "'");
        }
        if (!(b.capacity > 0.0) || !(b.max_power > 0.0) || !(b.efficiency > 0.0 && b.efficiency <= 1.0)) {
            throw ValidationError("battery '" + b.id + "' needs capacity > 0, max_power > 0, 0 < efficiency <= 1");
        }
    }
    // Reference checks, then cycle detection by repeated removal of sources.
    const auto n = inst.activities.size();
    std::vector<std::vector<std::size_t>> succ(n);
    std::vector<int> indegree(n, 0);
    for (const auto& p : inst.precedences) {
        const int b = inst.activity_index(p.before);
        const int a = inst.activity_index(p.after);
        if (b < 0 || a < 0) {
            throw ReferenceError("precedence refers to unknown activity '" + (b < 0 ? p.before : p.after) + "'");
        }
        if (inst.activities[static_cast<std::size_t>(b)].kind != inst.activities[static_cast<std::size_t>(a)].kind) {
            throw ValidationError("precedence " + p.before + " -> " + p.after + " mixes recurring and once-off");
        }
        succ[static_cast<std::size_t>(b)].push_back(static_cast<std::size_t>(a));
        ++indegree[static_cast<std::size_t>(a)];
    }
    std::vector<std::size_t> ready;
    for (std::size_t i = 0; i < n; ++i) {
        if (indegree[i] == 0) {
            ready.push_back(i);
        }
    }
    std::size_t seen = 0;
    while (!ready.empty()) {
        const auto i = ready.back();
        ready.pop_back();
        ++seen;
        for (auto j : succ[i]) {
            if (--indegree[j] == 0) {
                ready.push_back(j);
            }
        }
    }
    if (seen != n) {
        throw ValidationError("precedence graph has a cycle");
    }
}

} // namespace

Instance parse_instance(std::string_view text, const std::filesystem::path& base_dir)
{
    const auto lines = document_lines(text, kInstanceMagic);
    Instance inst;
    series::Date start{};
    int days = -1;
    std::vector<series::PeakWindow> windows;
    bool windows_given = false;
    std::vector<series::Date> holidays;
    SeriesSource load_src;
    SeriesSource price_src;
    std::map<std::string, std::vector<int>, std::less<>> starts;
    bool rooms_given = false;

    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) {
            continue;
        }
        const std::size_t ln = i + 1;
        const auto tok = split_whitespace(lines[i]);
        const auto key = tok[0];
        const auto need = [&](std::size_t count) {
            if (tok.size() != count) {
                fail(ln, "'" + std::string(key) + "' expects " + std::to_string(count - 1) + " fields");
            }
        };
        try {
            if (key == "name") {
                need(2);
                inst.name = std::string(tok[1]);
            } else if (key == "horizon") {
                need(3);
                start = series::parse_date(tok[1]);
                days = static_cast<int>(parse_integer(tok[2]));
            } else if (key == "rooms") {
                need(2);
                inst.n_rooms_total = static_cast<int>(parse_integer(tok[1]));
                rooms_given = true;
            } else if (key == "peak_coeff") {
                need(2);
                inst.peak_charge_coeff = parse_number(tok[1]);
            } else if (key == "size") {
                need(2);
                if (tok[1] != "small" && tok[1] != "large") {
                    fail(ln, "size must be small or large");
                }
                inst.size_class = tok[1] == "small" ? SizeClass::small : SizeClass::large;
            } else if (key == "peak") {
                need(4);
                windows_given = true;
                if (tok[1] != "none") {
                    windows.push_back({parse_weekdays(tok[1], ln), parse_number(tok[2]), parse_number(tok[3])});
                }
            } else if (key == "holiday") {
                need(2);
                holidays.push_back(series::parse_date(tok[1]));
            } else if (key == "battery") {
                need(5);
                inst.batteries.push_back(
                    {std::string(tok[1]), parse_number(tok[2]), parse_number(tok[3]), parse_number(tok[4])});
            } else if (key == "activity") {
                need(8);
                Activity a;
                a.id = std::string(tok[1]);
                if (tok[2] == "recurring") {
                    a.kind = ActivityKind::recurring;
                } else if (tok[2] == "once_off") {
                    a.kind = ActivityKind::once_off;
                } else {
                    fail(ln, "activity kind must be recurring or once_off");
                }
                a.duration = static_cast<int>(parse_integer(tok[3]));
                a.n_rooms = static_cast<int>(parse_integer(tok[4]));
                a.load_per_room = parse_number(tok[5]);
                a.value = parse_number(tok[6]);
                a.penalty = parse_number(tok[7]);
                inst.activities.push_back(std::move(a));
            } else if (key == "starts") {
                if (tok.size() < 3) {
                    fail(ln, "'starts' expects an activity id and at least one period");
                }
                auto& v = starts[std::string(tok[1])];
                for (std::size_t j = 2; j < tok.size(); ++j) {
                    v.push_back(static_cast<int>(parse_integer(tok[j])));
                }
            } else if (key == "prec") {
                need(3);
                inst.precedences.push_back({std::string(tok[1]), std::string(tok[2])});
            } else if (key == "load") {
                load_src = parse_series_ref(tok, ln);
            } else if (key == "price") {
                price_src = parse_series_ref(tok, ln);
            } else {
                fail(ln, "unknown directive '" + std::string(key) + "'");
            }
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            fail(ln, e.what());
        }
    }
    if (days < 0) {
        throw ParseError("instance is missing its horizon line");
    }
    if (!rooms_given) {
        throw ParseError("instance is missing its rooms line");
    }
    try {
        inst.calendar = series::build_calendar(start, days, windows_given ? windows : series::default_peak_windows(),
                                               holidays);
    } catch (const ConfigError& e) {
        throw ValidationError(e.what());
    }
    for (auto& [id, v] : starts) {
        const int idx = inst.activity_index(id);
        if (idx < 0) {
            throw ReferenceError("starts line refers to unknown activity '" + id + "'");
        }
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        inst.activities[static_cast<std::size_t>(idx)].allowed_starts = v;
    }
    inst.base_load = materialise(load_src, inst.calendar, base_dir, "load");
    inst.prices = materialise(price_src, inst.calendar, base_dir, "price");
    check_instance(inst);
    return inst;
}

std::string serialize_instance(const Instance& inst)
{
    std::ostringstream out;
    out << kInstanceMagic << '\n';
    if (!inst.name.empty()) {
        out << "name " << inst.name << '\n';
    }
    out << "horizon " << series::format_date(inst.calendar.start_date()) << ' ' << inst.calendar.n_days() << '\n';
    out << "rooms " << inst.n_rooms_total << '\n';
    out << "peak_coeff " << format_number(inst.peak_charge_coeff) << '\n';
    out << "size " << (inst.size_class == SizeClass::small ? "small" : "large") << '\n';
    if (inst.calendar.peak_windows().empty()) {
        out << "peak none 0 0\n";
    }
    for (const auto& w : inst.calendar.peak_windows()) {
        out << "peak ";
        bool first = true;
        for (int d = 0; d < 7; ++d) {
            if (w.weekdays[static_cast<std::size_t>(d)]) {
                out << (first ? "" : ",") << d;
                first = false;
            }
        }
        out << ' ' << format_number(w.start_hour) << ' ' << format_number(w.end_hour) << '\n';
    }
    for (const auto& h : inst.calendar.holidays()) {
        out << "holiday " << series::format_date(h) << '\n';
    }
    for (const auto& b : inst.batteries) {
        out << "battery " << b.id << ' ' << format_number(b.capacity) << ' ' << format_number(b.max_power) << ' '
            << format_number(b.efficiency) << '\n';
    }
    for (const auto& a : inst.activities) {
        out << "activity " << a.id << ' ' << (a.recurring() ? "recurring" : "once_off") << ' ' << a.duration << ' '
            << a.n_rooms << ' ' << format_number(a.load_per_room) << ' ' << format_number(a.value) << ' '
            << format_number(a.penalty) << '\n';
    }
    for (const auto& a : inst.activities) {
        if (!a.allowed_starts.empty()) {
            out << "starts " << a.id;
            for (int s : a.allowed_starts) {
                out << ' ' << s;
            }
            out << '\n';
        }
    }
    for (const auto& p : inst.precedences) {
        out << "prec " << p.before << ' ' << p.after << '\n';
    }
    const auto write_series = [&](std::string_view key, const TimeSeries& s) {
        out << key << " inline";
        for (int t = 0; t < s.size(); ++t) {
            out << ' ' << (s.observed(t) ? format_number(s[t]) : std::string("NA"));
        }
        out << '\n';
    };
    write_series("load", inst.base_load);
    write_series("price", inst.prices);
    return out.str();
}

// ---- schedule document -----------------------------------------------------

std::string serialize_schedule(const Schedule& s)
{
    std::ostringstream out;
    out << kScheduleMagic << '\n';
    out << "periods " << s.n_periods << '\n';
    for (const auto& [id, start] : s.starts) {
        out << "start " << id << ' ' << start << '\n';
    }
    for (const auto& [id, actions] : s.battery_actions) {
        out << "battery " << id << '\n';
        for (std::size_t t = 0; t < actions.size(); ++t) {
            if (actions[t] != 0.0) {
                out << "batt " << id << ' ' << t << ' ' << format_number(actions[t]) << '\n';
            }
        }
    }
    return out.str();
}

Schedule parse_schedule(std::string_view text)
{
    const auto lines = document_lines(text, kScheduleMagic);
    Schedule s;
    bool periods_given = false;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) {
            continue;
        }
        const std::size_t ln = i + 1;
        const auto tok = split_whitespace(lines[i]);
        if (tok[0] == "periods" && tok.size() == 2) {
            s.n_periods = static_cast<int>(parse_integer(tok[1]));
            if (s.n_periods < 0) {
                fail(ln, "negative period count");
            }
            periods_given = true;
        } else if (tok[0] == "start" && tok.size() == 3) {
            if (!s.starts.emplace(std::string(tok[1]), static_cast<int>(parse_integer(tok[2]))).second) {
                fail(ln, "duplicate start for '" + std::string(tok[1]) + "'");
            }
        } else if (tok[0] == "battery" && tok.size() == 2) {
            if (!periods_given) {
                fail(ln, "'periods' must precede battery lines");
            }
            s.battery_actions[std::string(tok[1])].assign(static_cast<std::size_t>(s.n_periods), 0.0);
        } else if (tok[0] == "batt" && tok.size() == 4) {
            const auto it = s.battery_actions.find(tok[1]);
            if (it == s.battery_actions.end()) {
                fail(ln, "battery '" + std::string(tok[1]) + "' not declared");
            }
            const long t = parse_integer(tok[2]);
            if (t < 0 || t >= s.n_periods) {
                fail(ln, "battery period out of range");
            }
            it->second[static_cast<std::size_t>(t)] = parse_number(tok[3]);
        } else {
            fail(ln, "unrecognised schedule line");
        }
    }
    return s;
}

} // namespace peakopt::sched
