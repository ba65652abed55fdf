// Tone output via the Web Audio API: a one-shot chirp for HIGH entry and
// a looping tone while the sustained-high alarm is active. Both 880 Hz.

const TONE_HZ = 880;
const CHIRP_MS = 150;

export class Alerter {
  private ctx: AudioContext | null = null;
  private alarmOsc: OscillatorNode | null = null;

  private context(): AudioContext | null {
    if (this.ctx === null) {
      try {
        this.ctx = new AudioContext();
      } catch {
        return null; // no audio device; face still renders
      }
    }
    return this.ctx;
  }

  chirp(): void {
    const ctx = this.context();
    if (!ctx) return;
    const osc = ctx.createOscillator();
    const gain = ctx.createGain();
    osc.type = "sine";
    osc.frequency.value = TONE_HZ;
    gain.gain.value = 0.4;
    osc.connect(gain);
    gain.connect(ctx.destination);
    const now = ctx.currentTime;
    osc.start(now);
    gain.gain.setValueAtTime(0.4, now);
    gain.gain.exponentialRampToValueAtTime(0.01, now + CHIRP_MS / 1000);
    osc.stop(now + CHIRP_MS / 1000 + 0.02);
    osc.onended = () => {
      osc.disconnect();
      gain.disconnect();
    };
  }

  setAlarm(active: boolean): void {
    const ctx = this.context();
    if (!ctx) return;
    if (active && this.alarmOsc === null) {
      const osc = ctx.createOscillator();
      const gain = ctx.createGain();
      osc.type = "square";
      osc.frequency.value = TONE_HZ;
      gain.gain.value = 0.25;
      osc.connect(gain);
      gain.connect(ctx.destination);
      osc.start();
      this.alarmOsc = osc;
    } else if (!active && this.alarmOsc !== null) {
      this.alarmOsc.stop();
      this.alarmOsc.disconnect();
      this.alarmOsc = null;
    }
  }
}
